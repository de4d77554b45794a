"""coloc: video co-localization via appearance-domain fusion of saliency cues."""

__version__ = "0.1.0"

import pytest

from coloc import kernels


@pytest.fixture(params=sorted(kernels.backends()))
def kernel_impl(request):
    """Run a test once per available kernel backend."""
    return kernels.backends()[request.param]

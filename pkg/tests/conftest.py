import pytest

from cuspdecay.hardy import TruncationSpec
from cuspdecay.maps import SymbolParams


@pytest.fixture(scope="session")
def params():
    # frozen output of maps.build_params() with the default seeds;
    # test_maps checks the pipeline still reproduces these
    return SymbolParams(theta=0.5, c=1.456697e-3, k_hat=2.519054)


@pytest.fixture(scope="session")
def small_spec():
    return TruncationSpec(16, 256)

import os
import sys
from pathlib import Path

import hypothesis
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from modules.model import EnvelopeShape, PulseEnvelope  # noqa: E402
from modules.run_config import PRESETS  # noqa: E402

hypothesis.settings.register_profile("ci", deadline=None, max_examples=50)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def fig2():
    return PRESETS["fig2"].params


@pytest.fixture
def fig3():
    return PRESETS["fig3"].params


@pytest.fixture
def fig2_ramped(fig2):
    return fig2.with_changes(envelope=PulseEnvelope(EnvelopeShape.SIN_SQUARED_RAMP, 0.5))


@pytest.fixture
def fig2_dissipative():
    return PRESETS["fig2-dissipative"].params


@pytest.fixture
def fig3_dissipative():
    return PRESETS["fig3-dissipative"].params

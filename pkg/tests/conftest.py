import pytest

from tmrforge import campaign as camp
from tmrforge.fabric import make_arch
from tmrforge.pnr import implement

ROUTING_SAMPLE = 2000
CAMPAIGN_SEED = 0

_impls: dict = {}


def get_impl(variant: str, floorplan: bool = False):
    key = (variant, floorplan)
    if key not in _impls:
        _impls[key] = implement(camp.build_variant(variant), make_arch(), floorplan=floorplan)
    return _impls[key]


@pytest.fixture(scope="session")
def arch():
    return make_arch()


@pytest.fixture(scope="session")
def impl():
    return get_impl


@pytest.fixture(scope="session")
def stim():
    return camp.StimulusSpec()


@pytest.fixture(scope="session")
def bits(stim):
    return camp.input_bits(stim)


@pytest.fixture(scope="session")
def golden(stim):
    return camp.golden_trace(stim)


@pytest.fixture(scope="session")
def routing_campaign():
    """Seeded routing-bit campaign over all five variants, scrubbing on."""
    impls = {v: get_impl(v) for v in camp.VARIANTS}
    return camp.campaign(impls, seed=CAMPAIGN_SEED, sample=ROUTING_SAMPLE, flt="routing", scrub=True)


_AC_KEY = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line: verdict(tag, ok, detail)."""
    lines = request.config.stash.setdefault(_AC_KEY, [])

    def emit(tag: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_AC_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

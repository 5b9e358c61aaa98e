import pytest

from curvedither import build_bank


@pytest.fixture(scope="session")
def small_bank():
    """Full-size 200x200 blocks, two variants; shared by injection and CLI tests."""
    return build_bank(block_side=200, site_count=300, variants=2, master_seed=11)

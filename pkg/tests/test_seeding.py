"""Seed derivation stability and a source scan for ambient randomness."""
import pathlib
import re

from dpgraphgen.seeding import derive_seed

SRC = pathlib.Path(__file__).resolve().parents[1] / "src" / "dpgraphgen"


def test_derive_seed_is_deterministic():
    assert derive_seed(7, "corpus", "planted", 0) == derive_seed(7, "corpus", "planted", 0)
    assert derive_seed(0) == derive_seed(0)


def test_derive_seed_distinct_paths_differ():
    seen = {
        derive_seed(0, "train", 1),
        derive_seed(0, "train", 2),
        derive_seed(1, "train", 1),
        derive_seed(0, "generate", 1),
        derive_seed(0),
        derive_seed("0"),  # same text, same seed: stringly keyed on purpose
    }
    assert len(seen) == 5
    assert derive_seed(0) == derive_seed("0")


def test_derive_seed_fits_numpy_seed_range():
    for parts in [(0,), (2**40, "x"), ("long", "path", 123, "tail")]:
        s = derive_seed(*parts)
        assert 0 <= s < 2**63


def test_derive_seed_frozen_values():
    # Frozen outputs: manifest seeds in shipped reports depend on these.
    assert derive_seed(0) == 3456079177858693020
    assert derive_seed(7, "corpus", "planted", 0) == 3442182160918944842


def test_no_ambient_randomness_in_library():
    """Every random draw must flow through an explicit Generator."""
    banned = re.compile(
        r"np\.random\.(?!Generator|default_rng|SeedSequence)\w+"
        r"|\brandom\.(random|randint|choice|shuffle|seed)\b"
    )
    unseeded = re.compile(r"default_rng\(\s*\)")
    for path in sorted(SRC.rglob("*.py")):
        text = path.read_text()
        assert not banned.search(text), f"ambient RNG call in {path.name}"
        assert not unseeded.search(text), f"unseeded default_rng in {path.name}"

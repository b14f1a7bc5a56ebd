"""Smoke test for the genlimit Python module.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

from pathlib import Path

import genlimit

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"


def main():
    ex = genlimit.Collection.load(str(DATA / "blocks.json"))
    assert len(ex) == 8, ex

    table = genlimit.complexity(ex)["table"]
    m_star = [e["mStar"] for e in table["entries"]]
    assert m_star == [0, 100, 0, 0, 0, 0, 0, 0], m_star

    sim = genlimit.simulate(ex, target=2, attack="canonical")["simReports"][0]
    assert sim["firstStable"] == 101 and sim["passed"], sim

    cmp = genlimit.compare(ex)
    assert cmp["times"]["cp-default"] == [1, 101, 101, 101, 5, 6, 7, 8]
    assert genlimit.dominance(cmp["times"]["m*+1"], cmp["times"]["cp-default"]) == "Dominates"

    noisy = genlimit.Collection.load(str(DATA / "two_noisy.json"))
    results = genlimit.verify(noisy, noisy=True)["invariantResults"]
    assert all(r["passed"] for r in results), results

    repr_c = genlimit.Collection.load(str(DATA / "two_repr.json"))
    groups = (DATA / "groups_two.json").read_text()
    runs = genlimit.simulate(repr_c, groups=groups, alpha="1/4", attack="repr")["simReports"]
    assert all(r["linfOk"] and r["passed"] for r in runs), runs

    rnd = genlimit.Collection.random(3, 5)
    assert all(r["passed"] for r in genlimit.verify(rnd)["invariantResults"])

    try:
        genlimit.simulate(ex, attack="sideways")
    except ValueError:
        pass
    else:
        raise AssertionError("bad attack accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()

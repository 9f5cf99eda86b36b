"""Smoke test for the compiled ``authortopic_py`` module.

Build and run from the repository root:

    cargo build --release -p authortopic-python --features extension-module
    cp target/release/libauthortopic_py.so crates/python/python/authortopic_py.so
    python3 crates/python/python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import authortopic_py as at  # noqa: E402

RECORDS = [
    ("p1", ["ann"], ["river", "boat", "river", "fish"]),
    ("p2", ["ann", "ben"], ["boat", "fish", "sail"]),
    ("p3", ["ben"], ["oven", "bread", "bread", "flour"]),
    ("p4", ["cal"], ["flour", "oven", "salt", "bread"]),
    ("p5", ["cal"], []),
]


def main():
    corpus = at.Corpus.from_records(RECORDS)
    assert (corpus.num_docs, corpus.dropped_empty) == (4, 1), corpus
    v = corpus.num_terms

    hdp = at.Chain("hdp", corpus, seed=7)
    trace = hdp.step(50)
    assert len(trace) == 50 and trace[-1][0] == 50 and trace[-1][2] >= 1
    perp, evaluated, skipped = hdp.perplexity()
    assert perp < v and evaluated == corpus.num_tokens and skipped == 0
    report = hdp.report(top_n=3)
    assert report["topics"] and len(report["topics"][0]["top_terms"]) <= 3

    lda = at.Chain("parametric", corpus, topics=2, alpha=0.5, seed=1)
    lda.step(30)
    assert lda.k_active is None
    theta = lda.theta()
    assert all(math.isclose(sum(row), 1.0) for row in theta)

    try:
        at.Chain("parametric", corpus, seed=1)
    except ValueError as e:
        assert "topics" in str(e)
    else:
        raise AssertionError("missing topics accepted")

    with tempfile.TemporaryDirectory() as tmp:
        ck = os.path.join(tmp, "chain.json")
        hdp.save(ck)
        resumed = at.Chain.load(ck)
        assert resumed.step(5) == hdp.step(5)

        data = os.path.join(tmp, "c.jsonl")
        with open(data, "w") as f:
            f.write(corpus.to_jsonl())
        out = at.train(json.dumps({
            "model": "hdp", "corpus": data, "iters": 20, "burnin": 10,
            "seed": 3, "out": os.path.join(tmp, "run"),
        }))
        assert os.path.isfile(os.path.join(out, "manifest.json"))
        perp2, _, _ = at.evaluate(os.path.join(out, "checkpoint.json"), data)
        assert perp2 < v

    enum = at.oracle_enumerate(sweeps=20_000)
    assert enum["states"] == 16
    gew = at.oracle_geweke(samples=500)
    assert [s["name"] for s in gew["statistics"]] == ["k_active", "max_tau"]

    print(f"authortopic_py {at.__version__}: smoke test passed "
          f"(hdp k_active={hdp.k_active}, perplexity={perp:.3f}, V={v})")


if __name__ == "__main__":
    main()

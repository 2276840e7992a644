import json
import math
import random

import pytest

import linr


def make_config(**kw):
    args = dict(dim=4, capacity=16, quant_bits=64, seed=3, clauses=[("geo", "match", 2), ("seen", "reverse", 2)])
    args.update(kw)
    return linr.IndexConfig(**args)


def brute_force(items, query, filt, k):
    """Reference top-k with match / reverse set logic and id tie-break."""
    passing = []
    for item_id, (emb, attrs) in items.items():
        geo, seen = filt.get("geo", []), filt.get("seen", [])
        if geo and not set(geo) & set(attrs.get("geo", [])):
            continue
        if seen and set(seen) & set(attrs.get("seen", [])):
            continue
        passing.append((-sum(a * b for a, b in zip(query, emb)), item_id))
    return [i for _, i in sorted(passing)[:k]]


def test_upsert_query_delete():
    index = linr.Index(make_config())
    index.upsert(1, [1, 0, 0, 0], {"geo": [3]})
    index.upsert(2, [0.5, 0, 0, 0], {"geo": [3], "seen": [9]})
    index.upsert(3, [2, 0, 0, 0], {"geo": [4]})
    assert len(index) == 3
    got = index.query([1, 0, 0, 0], k=5, filter={"geo": [3]}, algo="v2")
    assert got == [(1, 1.0), (2, 0.5)]
    assert [i for i, _ in index.query([1, 0, 0, 0], k=5, filter={"geo": [3], "seen": [9]})] == [1]
    assert index.delete(1)
    assert not index.contains(1)
    assert index.high_water_mark == 3
    assert index.get(2)["attrs"] == {"geo": [3], "seen": [9]}
    assert index.get(1) is None


def test_variants_match_reference():
    rng = random.Random(5)
    config = make_config(dim=8, capacity=300)
    index = linr.Index(config)
    items = {}
    for item_id in range(300):
        emb = [rng.gauss(0, 1) for _ in range(8)]
        attrs = {"geo": sorted(rng.sample(range(6), rng.randint(0, 2))), "seen": sorted(rng.sample(range(6), 1))}
        index.upsert(item_id, emb, attrs)
        items[item_id] = (emb, attrs)
    for _ in range(20):
        # float32-exact query so the reference sums agree on ranking
        q = [float(rng.randint(-4, 4)) for _ in range(8)]
        filt = {"geo": [rng.randrange(6)], "seen": [rng.randrange(6)]}
        v1 = [i for i, _ in index.query(q, k=10, filter=filt, algo="v1")]
        v2 = [i for i, _ in index.query(q, k=10, filter=filt, algo="v2")]
        v3 = [i for i, _ in index.query(q, k=10, filter=filt, algo="v3", keep_fraction=1.0)]
        assert v1 == v2 == v3
        ref = brute_force(items, q, filt, 10)
        assert set(v1) == set(ref)


def test_errors_carry_codes():
    index = linr.Index(make_config(capacity=1))
    with pytest.raises(linr.LinrError) as err:
        index.upsert(1, [1, 0, 0])
    assert err.value.code == "shape"
    index.upsert(1, [1, 0, 0, 0])
    with pytest.raises(linr.LinrError) as err:
        index.upsert(2, [1, 0, 0, 0])
    assert err.value.code == "capacity_exhausted"
    with pytest.raises(linr.LinrError):
        linr.IndexConfig(dim=0, capacity=1)


def test_snapshot_and_changelog_bootstrap(tmp_path):
    config = make_config()
    log = linr.ChangeLog(tmp_path / "changes.jsonl", config)
    assert log.upsert(1, [1, 0, 0, 0], {"geo": [1]}, config) == 1
    assert log.upsert(2, [0, 1, 0, 0], {}, config) == 2
    index = linr.Index.bootstrap(None, tmp_path / "changes.jsonl", config)
    assert index.save(tmp_path / "index.lnrs") == 2
    log.delete(1)
    resumed = linr.Index.bootstrap(tmp_path / "index.lnrs", tmp_path / "changes.jsonl", config)
    assert not resumed.contains(1) and resumed.contains(2)
    assert resumed.applied_seq == 3
    loaded = linr.Index.load(tmp_path / "index.lnrs", config)
    assert loaded.get(1)["embedding"] == [1, 0, 0, 0]
    with pytest.raises(linr.LinrError) as err:
        linr.Index.load(tmp_path / "index.lnrs", make_config(dim=5))
    assert err.value.code == "schema"


def test_sign_codes():
    a = [0.3, -1.0, 0.5, 2.0, -0.1, 0.0, 1.0, 1.5]
    code = linr.encode(a, 64, seed=1)
    assert len(code) == 1
    assert linr.matched_bits(code, code) == 64
    assert linr.est_cosine(64, 64) == pytest.approx(1.0)
    assert linr.est_cosine(32, 64) == pytest.approx(0.0, abs=1e-12)
    errs = [linr.quantize_eval(64, b, 2000, 1)["mean_abs_error"] for b in (64, 256, 1024)]
    assert errs[0] > errs[1] > errs[2]


def test_compression_report():
    r = linr.compression_report(10**9, 64, 2, 64)
    assert r["ratio"] == 16.0
    assert r["embedding_bytes"] / 2**30 == pytest.approx(119.21, abs=0.01)


def test_benchmark_end_to_end(tmp_path):
    config = {"bench": {"n_items": 1500, "dim": 16, "quant_bits": 64, "n_queries": 15, "k": 10,
                        "n_clusters": 5, "algos": ["v1", "v2"]}}
    changes, queries = linr.gen_synthetic(config, tmp_path)
    assert changes.exists() and queries.exists()
    first = json.loads(queries.read_text().splitlines()[0])
    assert set(first) >= {"qid", "emb", "filter", "k"}
    report = linr.run_benchmark(config, tmp_path)
    assert [row["algo"] for row in report["rows"]] == ["v1", "v2"]
    assert all(row["recall_at_k"] == 1.0 for row in report["rows"])
    assert math.isfinite(report["rows"][0]["avg_latency_ms"])

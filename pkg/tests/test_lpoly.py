import json
import math

import numpy as np
import pytest

from oracles import brute_trace
from p2sato._numtheory import primes_up_to
from p2sato.lpoly import (
    SweepPersistenceError,
    SweepState,
    brute_force_trace,
    curve_a1,
    curve_trace,
    histogram,
    numerical_moments,
    read_records,
    sweep,
    symmetry_statistic,
)


@pytest.mark.parametrize("m", [9, 25])
def test_traces_match_brute_force(m):
    for q in primes_up_to(200):
        q = int(q)
        if q == 2 or m % q == 0:
            continue
        t = brute_trace(q, m)
        assert curve_trace(q, m) == t == brute_force_trace(q, m)
        assert curve_a1(q, m) == pytest.approx(t / math.sqrt(q), abs=1e-15)


def test_bad_primes_rejected():
    for q in (2, 5, 15):
        with pytest.raises(ValueError):
            curve_trace(q, 25)


def test_zero_trace_off_one_mod_p():
    state = sweep(5, 10_000)
    for r in state.records:
        if r.q % 5 != 1:
            assert r.trace == 0
        if r.k % 4:
            assert r.trace == 0
        assert r.trace**2 <= 24**2 * r.q


def test_records_sorted_unique():
    qs = [r.q for r in sweep(5, 5000).records]
    assert qs == sorted(set(qs))
    assert 2 not in qs and 5 not in qs


def test_jobs_independence(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    sa = sweep(5, 30_000, directory=a, chunk_size=500)
    sb = sweep(5, 30_000, directory=b, chunk_size=500, jobs=2)
    assert sa.records == sb.records
    name = "sweep-p5-a2.records.csv"
    assert (a / name).read_bytes() == (b / name).read_bytes()


def test_resume_matches_uninterrupted(tmp_path):
    full = sweep(5, 20_000, directory=tmp_path / "full", chunk_size=300)
    part = tmp_path / "part"
    first = sweep(5, 20_000, directory=part, chunk_size=300, max_chunks=3)
    assert 0 < len(first.records) < len(full.records)
    done = sweep(5, 20_000, directory=part, chunk_size=300, resume=True)
    assert done.records == full.records
    name = "sweep-p5-a2.records.csv"
    assert (part / name).read_bytes() == (tmp_path / "full" / name).read_bytes()


def test_resume_truncates_torn_write(tmp_path):
    first = sweep(5, 5000, directory=tmp_path, chunk_size=100, max_chunks=2)
    rec = tmp_path / "sweep-p5-a2.records.csv"
    with open(rec, "a") as fh:
        fh.write("99991,3,17,0.05")  # partial line past the checkpoint
    done = sweep(5, 5000, directory=tmp_path, chunk_size=100, resume=True)
    assert done.records == sweep(5, 5000).records
    assert read_records(rec) == done.records
    assert len(first.records) < len(done.records)


def test_resume_extends_bound(tmp_path):
    sweep(5, 3000, directory=tmp_path)
    longer = sweep(5, 6000, directory=tmp_path, resume=True)
    assert longer.records == sweep(5, 6000).records
    ck = json.loads((tmp_path / "sweep-p5-a2.checkpoint.json").read_text())
    assert ck["records"] == len(longer.records) and ck["bound"] == 6000


def test_checkpoint_mismatch_detected(tmp_path):
    sweep(5, 3000, directory=tmp_path)
    ck = tmp_path / "sweep-p5-a2.checkpoint.json"
    data = json.loads(ck.read_text())
    data["records"] += 1
    ck.write_text(json.dumps(data))
    with pytest.raises(SweepPersistenceError):
        sweep(5, 3000, directory=tmp_path, resume=True)


def test_record_file_format(tmp_path):
    sweep(5, 500, directory=tmp_path)
    lines = (tmp_path / "sweep-p5-a2.records.csv").read_text().splitlines()
    meta = json.loads(lines[0][2:])
    assert meta["generator"] == 2 and "a1" in meta["convention"]
    assert lines[1] == "q,k,trace,a1"
    q, k, t, a1 = lines[2].split(",")
    assert int(q) == 3 and float(a1) == pytest.approx(int(t) / math.sqrt(3))


def test_numerical_moments_small():
    state = sweep(5, 20_000)
    nm = numerical_moments(state, 4)
    a1 = state.a1_array()
    assert nm.overall[2] == pytest.approx(np.mean(a1**2))
    assert nm.count == len(state.records)
    assert sum(nm.class_counts.values()) == nm.count
    assert nm.per_class[1][2] == 0.0


def test_empty_inputs():
    empty = SweepState(5, 2, 10)
    h = histogram(empty)
    assert h.total == 0 and h.counts.sum() == 0 and h.zero_fraction == 0.0
    assert symmetry_statistic(h) == (0.0, 0)
    with pytest.raises(ValueError):
        numerical_moments(empty, 2)


def test_histogram_accounts_for_every_record():
    state = sweep(5, 50_000)
    h = histogram(state, bins=51)
    assert h.counts.sum() + h.zero_count == h.total == len(state.records)
    assert h.edges[0] == -24 and h.edges[-1] == 24
    assert len(h.rows()) == 51


def test_sweep_rejects_bad_generator():
    with pytest.raises(ValueError):
        sweep(5, 100, a=7)


def test_restricted_view_of_longer_sweep(tmp_path):
    longer = sweep(5, 8000, directory=tmp_path)
    again = sweep(5, 4000, directory=tmp_path, resume=True).restricted(4000)
    assert again.records == sweep(5, 4000).records
    assert len(again.records) < len(longer.records)

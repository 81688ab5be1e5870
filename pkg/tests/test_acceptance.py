"""Exit criteria. Each test records one PASS/FAIL line for the summary."""

import json
import resource
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from recome.atoms import find_cores
from recome.dataset import BlobSpec, Dataset, generate_blobs, load_iris
from recome.jdd import jd_set, max_capacity_search, sweep
from recome.knn import build_knn, default_k
from recome.merge import Recome
from recome.metrics import bcubed, evaluate, nmi

from conftest import ACCEPTANCE_LINES
from oracles import random_weighted_graph, simple_path_capacity

SCALE_SPEC = Path(__file__).resolve().parents[1] / "src" / "recome" / "data" / "scale_8000.json"


def record(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
    assert ok, detail


def criterion_datasets(count=120):
    """Seeded random 2-D sets, n <= 60: plain Gaussian clouds and blob mixtures."""
    out = []
    for seed in range(count):
        rng = np.random.default_rng(10_000 + seed)
        n = int(rng.integers(6, 61))
        if seed % 2:
            out.append(Dataset(rng.normal(size=(n, 2)) * rng.uniform(0.3, 3.0, size=2)))
        else:
            parts = int(rng.integers(2, 5))
            sizes = np.maximum(1, rng.multinomial(n - parts, np.ones(parts) / parts) + 1)
            spec = BlobSpec(
                clusters=tuple(
                    (tuple(rng.uniform(-10, 10, size=2)), float(rng.uniform(0.2, 2.0)), int(c))
                    for c in sizes
                ),
                seed=seed,
            )
            out.append(generate_blobs(spec))
    return out


def probe_alphas(rnkd):
    thresholds = sorted(set(rnkd.tolist()) | {0.0, 1.0})
    mids = [(a + b) / 2 for a, b in zip(thresholds, thresholds[1:])]
    return sorted(set(thresholds) | set(mids))


def test_1_jd_matches_threshold_oracle():
    t0 = time.perf_counter()
    sets = criterion_datasets()
    mismatches = 0
    for ds in sets:
        model = Recome.fit(ds, default_k(ds.n))
        values = jd_set(model.graph, model.profile, model.cores)
        probes = probe_alphas(model.profile.rnkd)
        counts = [model.labeling(a).num_clusters for a in probes]
        changes = [a for a, p, c in zip(probes[1:], counts, counts[1:]) if c != p]
        if values != [0.0] + changes:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    record(1, "JDD vs threshold sweep", mismatches == 0 and elapsed < 60,
           f"{len(sets)} datasets, {mismatches} mismatches, {elapsed:.1f}s (< 60s)")


def test_2_capacity_search_matches_brute_force():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    graphs = bad = 0
    for directed in (False, True):
        for _ in range(200):
            adj, w = random_weighted_graph(rng, directed)
            s = int(rng.integers(len(w)))
            res = max_capacity_search(adj, w, s)
            graphs += 1
            if any(res.capacity[t] != simple_path_capacity(adj, w, s, t) for t in range(len(w))):
                bad += 1
    elapsed = time.perf_counter() - t0
    record(2, "capacity search vs all simple paths", bad == 0 and elapsed < 30,
           f"{graphs} graphs (n <= 12), {bad} mismatches, {elapsed:.1f}s (< 30s)")


def _refines(fine, coarse, cores):
    """True if the core partition ``fine`` is a refinement of ``coarse``."""
    mapping = {}
    for c in cores:
        if mapping.setdefault(fine[c], coarse[c]) != coarse[c]:
            return False
    return True


def test_3_monotone_step_function():
    problems = 0
    sets = criterion_datasets()
    for ds in sets:
        model = Recome.fit(ds, default_k(ds.n))
        cores = model.cores
        jd = jd_set(model.graph, model.profile, cores)
        probes = probe_alphas(model.profile.rnkd)
        labs = [model.labeling(a) for a in probes]
        for prev, cur in zip(labs, labs[1:]):
            if prev.num_clusters > cur.num_clusters or not _refines(cur.labels, prev.labels, cores):
                problems += 1
        # same labelling everywhere in [jd_i, jd_{i+1})
        edges = jd + [1.0 + 1e-9]
        for lo, hi in zip(edges, edges[1:]):
            inside = [lab for a, lab in zip(probes, labs) if lo <= a < hi]
            if any(not np.array_equal(inside[0].labels, lab.labels) for lab in inside[1:]):
                problems += 1
    record(3, "monotone step function", problems == 0,
           f"{len(sets)} datasets, {problems} violations")


def test_4_iris():
    t0 = time.perf_counter()
    res = sweep(load_iris(), 12)
    elapsed = time.perf_counter() - t0
    best = [e for e in res.entries if e.metrics["nmi"] >= 0.72 and e.metrics["f"] >= 0.78]
    counts = res.num_clusters
    ok = bool(best) and 3 <= len(res.jd_values) <= 6 and 3 in counts and elapsed < 5
    top = max(res.entries, key=lambda e: (e.metrics["nmi"], e.metrics["f"]))
    record(4, "Iris reproduction", ok,
           f"L={[round(a, 3) for a in res.jd_values]} C={counts} "
           f"best alpha={top.alpha:.3f} NMI={top.metrics['nmi']:.3f} F={top.metrics['f']:.3f} "
           f"(need NMI>=0.72, F>=0.78), {elapsed:.2f}s")


def test_5_density_invariants():
    sets = criterion_datasets(60)
    rng = np.random.default_rng(5)
    sets += [Dataset(rng.normal(size=(int(rng.integers(61, 201)), 3))) for _ in range(10)]
    sets.append(load_iris())
    bad = 0
    for ds in sets:
        k = default_k(ds.n)
        model = Recome.fit(ds, k)
        prof, idx = model.profile, model.index
        cores = find_cores(prof).tolist()
        brute = [u for u in range(ds.n) if all(prof.nkd[u] >= prof.nkd[v] for v in idx.neighbors[u])]
        ok = (
            np.all((prof.nkd > 0) & (prof.nkd <= k))
            and np.all((prof.rnkd > 0) & (prof.rnkd <= 1))
            and len(cores) >= 1
            and cores == brute
        )
        bad += not ok
    record(5, "density invariants", bad == 0, f"{len(sets)} datasets (n <= 200), {bad} failures")


def test_6_metrics():
    truth = list("AAABBCCCC")
    same = [7, 7, 7, 1, 1, 4, 4, 4, 4]
    ok = nmi(same, truth) == pytest.approx(1.0, abs=1e-15) and bcubed(same, truth)[2] == 1.0
    ok = ok and bcubed([1, 1, 1, 2], list("AABB")) == (0.5, 0.5, 0.5)
    rng = np.random.default_rng(6)
    for _ in range(500):
        n = int(rng.integers(1, 40))
        rep = evaluate(rng.integers(0, 5, n).tolist(), rng.integers(0, 4, n).tolist())
        ok = ok and all(0.0 <= v <= 1.0 for v in (rep.nmi, rep.pb, rep.rb, rep.f))
    record(6, "metric correctness", ok, "identity=1, B-cubed example=0.5 exactly, 500 random labelings in [0,1]")


def _cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "recome", *args], capture_output=True, text=True, env=env)


def test_7_scale(tmp_path):
    data = tmp_path / "scale.csv"
    gen = _cli("gen", "--spec", str(SCALE_SPEC), "--out", str(data))
    assert gen.returncode == 0, gen.stderr
    t0 = time.perf_counter()
    run = _cli("sweep", "--input", str(data), "--label-col", "label", "--out", str(tmp_path / "sweep"))
    elapsed = time.perf_counter() - t0
    peak_mb = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss / 1024
    rows = json.loads((tmp_path / "sweep" / "sweep.json").read_text()) if run.returncode == 0 else []
    ok = run.returncode == 0 and elapsed < 120 and peak_mb < 2048
    record(7, "8000-point sweep", ok,
           f"exit={run.returncode}, {elapsed:.1f}s (< 120s), peak RSS {peak_mb:.0f} MB (< 2048), "
           f"{len(rows)} JD levels")


def _snapshot(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_8_determinism(tmp_path):
    spec = {"clusters": [{"center": [0, 0], "stddev": 1.0, "count": 150},
                         {"center": [6, 1], "stddev": 0.5, "count": 100}],
            "noise_count": 20, "noise_box": [[-5, -5], [10, 10]], "seed": 9}
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    outputs = []
    for rep, threads in enumerate(["1", "3", "1"]):
        wd = tmp_path / f"run{rep}"
        wd.mkdir()
        data = wd / "d.csv"
        cmds = [
            ["gen", "--spec", str(tmp_path / "spec.json"), "--out", str(data)],
            ["cluster", "--input", str(data), "--label-col", "label", "--alpha", "0.8", "--out", str(wd / "c")],
            ["jd", "--input", str(data), "--label-col", "label"],
            ["sweep", "--input", str(data), "--label-col", "label", "--out", str(wd / "s")],
            ["density", "--input", str(data), "--label-col", "label", "--out", str(wd / "dens.csv")],
            ["fdp", "--input", str(data), "--label-col", "label", "--centers", "2", "--out", str(wd / "f")],
            ["eval", "--pred", str(wd / "c" / "labels.csv"), "--truth", str(wd / "f" / "labels.csv")],
        ]
        stdout = []
        for cmd in cmds:
            proc = _cli(*cmd, "--threads", threads) if cmd[0] not in ("gen", "eval") else _cli(*cmd)
            assert proc.returncode == 0, proc.stderr
            stdout.append(proc.stdout.replace(str(wd), "<wd>"))
        files = _snapshot(wd)
        for name in ("c/report.json", "s/report.json", "f/report.json"):
            files[name] = files[name].replace(str(wd).encode(), b"<wd>")
        outputs.append((stdout, files))
    same = all(o == outputs[0] for o in outputs[1:])
    record(8, "determinism", same,
           f"7 commands x 3 runs (threads 1/3/1), {len(outputs[0][1])} files compared byte for byte")

"""Command-line front end.

Every command is deterministic for a given input and configuration. Errors
are reported as one JSON line on stderr with a distinct exit status.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .dataset import (
    BlobSpec,
    DatasetError,
    generate_blobs,
    load_dataset,
    minmax_normalize,
    save_dataset,
)
from .density import write_density_csv
from .fdp import fdp_cluster
from .jdd import jd_set, sweep
from .knn import DegenerateDatasetError, default_k, write_knn_csv
from .merge import Recome
from .metrics import evaluate

SCHEMA_VERSION = 1
THREADS_ENV = "RECOME_THREADS"

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DATA = 4
EXIT_PARAM = 5
EXIT_DEGENERATE = 6


class CliError(Exception):
    def __init__(self, kind: str, message: str, status: int):
        super().__init__(message)
        self.kind = kind
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, EXIT_USAGE)


def _k_arg(text):
    if text == "auto":
        return "auto"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be a positive integer or 'auto', got {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError(f"k must be positive, got {k}")
    return k


def _default_threads():
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError("param", f"{THREADS_ENV} must be an integer, got {env!r}", EXIT_PARAM)
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="recome", description="RECOME density clustering and alpha jump discovery.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(p, need_k=True):
        p.add_argument("--input", required=True, help="comma- or whitespace-delimited numeric table")
        p.add_argument("--label-col", default=None, help="ground-truth column (header name or 0-based index)")
        p.add_argument("--header", action="store_true", help="first row holds column names")
        p.add_argument("--normalize", action="store_true", help="min-max scale every feature to [0, 1]")
        if need_k:
            p.add_argument("--k", type=_k_arg, default="auto", help="neighbours per object, or 'auto' for floor(sqrt(n))")
        p.add_argument("--threads", type=int, default=None, help=f"worker count (default ${THREADS_ENV} or CPU count)")

    p = sub.add_parser("cluster", help="cluster at one alpha")
    data_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--out", required=True, help="output directory for labels.csv and report.json")

    p = sub.add_parser("jd", help="print the jump-discontinuity set of alpha")
    data_args(p)
    p.add_argument("--directed-search", action="store_true", help="search along directed KNN edges only")

    p = sub.add_parser("sweep", help="cluster at every jump discontinuity")
    data_args(p)
    p.add_argument("--directed-search", action="store_true")
    p.add_argument("--out", required=True, help="output directory for sweep.json and per-alpha label files")

    p = sub.add_parser("eval", help="score predicted labels against ground truth")
    p.add_argument("--pred", required=True, help="label CSV (id,label)")
    p.add_argument("--truth", required=True, help="label CSV (id,label)")
    p.add_argument("--out", default=None, help="also write the report here")

    p = sub.add_parser("density", help="export NKD/RNKD per object")
    data_args(p)
    p.add_argument("--out", required=True, help="CSV path (id,nkd,rnkd)")
    p.add_argument("--knn-out", default=None, help="optional KNN index CSV for debugging")

    p = sub.add_parser("gen", help="generate a labelled synthetic dataset")
    p.add_argument("--spec", required=True, help="BlobSpec JSON document")
    p.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    p.add_argument("--out", required=True, help="CSV path; labels in the trailing column")

    p = sub.add_parser("fdp", help="density-peaks baseline with a fixed number of centres")
    data_args(p)
    p.add_argument("--centers", type=int, required=True)
    p.add_argument("--out", required=True)
    return parser


def _load(args):
    try:
        ds = load_dataset(args.input, label_column=args.label_col, has_header=args.header)
    except OSError as exc:
        raise CliError("io", f"cannot read {args.input}: {exc.strerror or exc}", EXIT_IO)
    except DatasetError as exc:
        raise CliError("data", str(exc), EXIT_DATA)
    if args.normalize:
        ds = minmax_normalize(ds)
    return ds


def _resolve_k(args, n):
    k = default_k(n) if args.k == "auto" else args.k
    if not 1 <= k <= n - 1:
        raise CliError("param", f"k must lie in [1, {n - 1}] for n={n}, got {k}", EXIT_PARAM)
    return k


def _threads(args):
    t = args.threads if args.threads is not None else _default_threads()
    if t < 1:
        raise CliError("param", f"threads must be >= 1, got {t}", EXIT_PARAM)
    return t


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise CliError("param", f"alpha must lie in [0, 1], got {alpha}", EXIT_PARAM)


def _fit(args, ds):
    k = _resolve_k(args, ds.n)
    try:
        return Recome.fit(ds, k, threads=_threads(args))
    except DegenerateDatasetError as exc:
        raise CliError("degenerate", str(exc), EXIT_DEGENERATE)


def _outdir(path):
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError("io", f"cannot create {out}: {exc.strerror or exc}", EXIT_IO)
    return out


def write_labels(labels, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id,label\n")
        for i, lab in enumerate(labels):
            fh.write(f"{i},{lab}\n")


def read_labels(path) -> dict:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror or exc}", EXIT_IO)
    if not rows or [c.strip() for c in rows[0]] != ["id", "label"]:
        raise CliError("data", f"{path}: expected header 'id,label'", EXIT_DATA)
    out = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise CliError("data", f"{path}: row {lineno} must have 2 cells", EXIT_DATA)
        key = row[0].strip()
        if key in out:
            raise CliError("data", f"{path}: duplicate id {key!r} at row {lineno}", EXIT_DATA)
        out[key] = row[1].strip()
    return out


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _format_alpha(a: float) -> str:
    return f"{a:.17g}"


def _provenance(args, ds, model) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "input": str(args.input),
        "n": ds.n,
        "m": ds.m,
        "k": model.k,
        "sigma": model.profile.sigma,
        "num_cores": int(len(model.cores)),
        "normalize": bool(args.normalize),
    }


def cmd_cluster(args, stdout):
    _check_alpha(args.alpha)
    ds = _load(args)
    model = _fit(args, ds)
    lab = model.labeling(args.alpha)
    out = _outdir(args.out)
    write_labels(lab.labels, out / "labels.csv")
    report = _provenance(args, ds, model)
    report.update(alpha=args.alpha, num_clusters=lab.num_clusters, cluster_sizes=lab.sizes())
    if ds.labels is not None:
        report["metrics"] = evaluate(lab.labels, ds.labels).as_dict()
    _dump(report, out / "report.json")
    print(json.dumps({"k": model.k, "num_clusters": lab.num_clusters}), file=stdout)


def cmd_jd(args, stdout):
    ds = _load(args)
    model = _fit(args, ds)
    values = jd_set(model.graph, model.profile, model.cores,
                    undirected=not args.directed_search, threads=_threads(args))
    for v in values:
        print(_format_alpha(v), file=stdout)


def cmd_sweep(args, stdout):
    ds = _load(args)
    model = _fit(args, ds)
    res = sweep(ds, undirected=not args.directed_search, threads=_threads(args), model=model)
    out = _outdir(args.out)
    rows = []
    for i, e in enumerate(res.entries):
        name = f"labels_{i:03d}.csv"
        write_labels(e.labeling.labels, out / name)
        row = {"alpha": e.alpha, "num_clusters": e.num_clusters, "labels_file": name,
               "cluster_sizes": e.labeling.sizes()}
        if e.metrics is not None:
            row.update(nmi=e.metrics["nmi"], f=e.metrics["f"], pb=e.metrics["pb"], rb=e.metrics["rb"])
        rows.append(row)
    _dump(rows, out / "sweep.json")
    report = _provenance(args, ds, model)
    report.update(jd_values=res.jd_values, directed_search=bool(args.directed_search))
    _dump(report, out / "report.json")
    print(json.dumps(rows), file=stdout)


def cmd_eval(args, stdout):
    pred = read_labels(args.pred)
    truth = read_labels(args.truth)
    if set(pred) != set(truth):
        missing = sorted(set(pred) ^ set(truth))[:5]
        raise CliError("data", f"label files cover different ids, e.g. {missing}", EXIT_DATA)
    ids = sorted(pred, key=lambda s: (len(s), s))
    report = evaluate([pred[i] for i in ids], [truth[i] for i in ids]).as_dict()
    report["schema_version"] = SCHEMA_VERSION
    report["n"] = len(ids)
    if args.out:
        _dump(report, args.out)
    print(json.dumps(report, sort_keys=True), file=stdout)


def cmd_density(args, stdout):
    ds = _load(args)
    model = _fit(args, ds)
    try:
        write_density_csv(model.profile, args.out)
        if args.knn_out:
            write_knn_csv(model.index, args.knn_out)
    except OSError as exc:
        raise CliError("io", f"cannot write output: {exc.strerror or exc}", EXIT_IO)
    print(json.dumps({"k": model.k, "sigma": model.profile.sigma, "num_cores": int(len(model.cores))}),
          file=stdout)


def cmd_gen(args, stdout):
    try:
        doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError("io", f"cannot read {args.spec}: {exc.strerror or exc}", EXIT_IO)
    except json.JSONDecodeError as exc:
        raise CliError("data", f"{args.spec}: invalid JSON ({exc})", EXIT_DATA)
    if args.seed is not None:
        doc["seed"] = args.seed
    try:
        spec = BlobSpec.from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("param", f"invalid blob spec: {exc}", EXIT_PARAM)
    ds = generate_blobs(spec)
    try:
        save_dataset(ds, args.out)
    except OSError as exc:
        raise CliError("io", f"cannot write {args.out}: {exc.strerror or exc}", EXIT_IO)
    print(json.dumps({"n": ds.n, "m": ds.m, "seed": spec.seed}), file=stdout)


def cmd_fdp(args, stdout):
    ds = _load(args)
    if not 1 <= args.centers <= ds.n:
        raise CliError("param", f"centers must lie in [1, {ds.n}], got {args.centers}", EXIT_PARAM)
    model = _fit(args, ds)
    lab = fdp_cluster(ds, args.centers, model.profile.nkd, k=model.k)
    out = _outdir(args.out)
    write_labels(lab.labels, out / "labels.csv")
    report = _provenance(args, ds, model)
    report.update(centers=args.centers, num_clusters=lab.num_clusters, cluster_sizes=lab.sizes())
    if ds.labels is not None:
        report["metrics"] = evaluate(lab.labels, ds.labels).as_dict()
    _dump(report, out / "report.json")
    print(json.dumps({"k": model.k, "num_clusters": lab.num_clusters}), file=stdout)


COMMANDS = {
    "cluster": cmd_cluster,
    "jd": cmd_jd,
    "sweep": cmd_sweep,
    "eval": cmd_eval,
    "density": cmd_density,
    "gen": cmd_gen,
    "fdp": cmd_fdp,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args, stdout)
    except CliError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=stderr)
        return exc.status
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

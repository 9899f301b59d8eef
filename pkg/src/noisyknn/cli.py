"""Command-line surface for reproducible noise experiments.

Subcommands: analytic, knn-eval, inject, validate, softmax-compare.
Exit codes: 0 success, 2 usage/input error, 3 validation failure.
Output files embed the resolved configuration as '#' header lines; the
thread count is deliberately omitted because it never affects results.
"""
from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import io as nio
from . import knn, oracle
from .curves import AccuracyCurve, analytic_curve, empirical_curve
from .dataset import FeatureDataset
from .noise import NoiseSpec, build_matrix, cyclic_flip_map, inject_concentrated_noise, inject_random_noise
from .plurality import (
    LabelDistribution,
    NeighborhoodSpec,
    plurality_accuracy,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3


class CliError(Exception):
    pass


def _parse_gammas(args) -> list[float]:
    if args.gamma is not None and args.gamma_grid is not None:
        raise CliError("give either --gamma or --gamma-grid, not both")
    if args.gamma is not None:
        vals = [float(x) for x in args.gamma.split(",") if x.strip()]
    elif args.gamma_grid is not None:
        try:
            start, stop, step = (float(x) for x in args.gamma_grid.split(":"))
        except ValueError as exc:
            raise CliError("--gamma-grid must be START:STOP:STEP") from exc
        if step <= 0:
            raise CliError("--gamma-grid step must be positive")
        count = int(round((stop - start) / step)) + 1
        vals = [round(start + i * step, 12) for i in range(count) if start + i * step <= stop + 1e-12]
    else:
        raise CliError("a gamma grid is required (--gamma or --gamma-grid)")
    if not vals:
        raise CliError("empty gamma grid")
    if any(not 0 <= v <= 1 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
        raise CliError("gammas must be strictly increasing within [0, 1]")
    return vals


def _parse_seed(value: str) -> int:
    if value == "auto":
        seed = secrets.randbits(63)
        print(f"seed auto -> {seed}", file=sys.stderr)
        return seed
    try:
        return int(value)
    except ValueError as exc:
        raise CliError(f"--seed must be an integer or 'auto', got {value!r}") from exc


def _threads(args) -> int:
    t = args.threads
    if t is None:
        t = int(os.environ.get("NOISYKNN_THREADS", "0"))
    if t == 0:
        t = os.cpu_count() or 1
    if t < 1:
        raise CliError("--threads must be >= 0")
    return t


def _parse_flip_map(text: str | None, l: int) -> np.ndarray:
    if text is None or text == "cyclic":
        return cyclic_flip_map(l)
    fmap = np.array([int(x) for x in text.split(",")], dtype=np.int64)
    if fmap.size != l:
        raise CliError(f"--flip-map needs {l} entries")
    return fmap


def _load_matrix(args, l: int):
    if args.noise == "uniform":
        return build_matrix("uniform", l)
    if args.noise == "flip":
        return build_matrix("flip", l, flip_map=_parse_flip_map(args.flip_map, l))
    if args.noise == "matrix":
        if not args.matrix:
            raise CliError("--matrix is required for matrix noise")
        m = nio.read_matrix_csv(args.matrix)
        if m.num_labels != l:
            raise CliError(f"matrix is {m.num_labels}x{m.num_labels} but --l is {l}")
        return m
    raise CliError(f"unsupported noise regime {args.noise!r}")


def _load_dataset(features_path: str, labels_path: str, num_labels: int) -> FeatureDataset:
    feats = nio.read_features(features_path)
    labels = nio.read_labels(labels_path)
    return FeatureDataset(feats, labels, num_labels)


def _config_header(args, command: str, **extra) -> dict:
    cfg = {"command": command}
    skip = {"func", "threads"}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None:
            continue
        cfg[key.replace("_", "-")] = value
    cfg.update(extra)
    return cfg


def cmd_analytic(args) -> int:
    l = args.l
    gammas = _parse_gammas(args)
    matrix = _load_matrix(args, l)
    if args.clean == "point-mass":
        dists = [(LabelDistribution.point_mass(l, args.correct_label), args.correct_label)]
    elif args.clean == "knn-histogram":
        for opt in ("train_features", "train_labels", "test_features", "test_labels"):
            if getattr(args, opt) is None:
                raise CliError(f"--{opt.replace('_', '-')} is required for knn-histogram")
        train = _load_dataset(args.train_features, args.train_labels, l)
        test = _load_dataset(args.test_features, args.test_labels, l)
        dists = [
            (knn.clean_distribution(train, test.features[i], args.k), int(test.labels[i]))
            for i in range(len(test))
        ]
    else:  # softmax-file
        if args.softmax is None or args.test_labels is None:
            raise CliError("--softmax and --test-labels are required for softmax-file")
        rows = nio.read_softmax_csv(args.softmax)
        labels = nio.read_labels(args.test_labels)
        if rows.shape[0] != labels.size:
            raise CliError("softmax rows and test labels disagree in count")
        if rows.shape[1] != l:
            raise CliError(f"softmax rows have {rows.shape[1]} columns, expected {l}")
        sums = rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-6):
            raise CliError("softmax rows must sum to 1 (tolerance 1e-6)")
        dists = [
            (LabelDistribution(rows[i] / sums[i]), int(labels[i]))
            for i in range(rows.shape[0])
        ]
    curve = analytic_curve(dists, args.k, matrix, gammas, threads=_threads(args))
    nio.write_curve_csv(args.out, curve, _config_header(args, "analytic"))
    return EXIT_OK


def cmd_knn_eval(args) -> int:
    gammas = _parse_gammas(args)
    seed = _parse_seed(args.seed)
    train = _load_dataset(args.train_features, args.train_labels, args.l)
    test = _load_dataset(args.test_features, args.test_labels, args.l)
    matrix = flip_map = None
    if args.noise == "matrix":
        matrix = _load_matrix(args, args.l)
    elif args.noise == "flip":
        flip_map = _parse_flip_map(args.flip_map, args.l)
    curve = empirical_curve(
        train,
        test,
        args.k,
        args.noise,
        gammas,
        repeats=args.repeats,
        base_seed=seed,
        matrix=matrix,
        flip_map=flip_map,
        threads=_threads(args),
    )
    nio.write_curve_csv(args.out, curve, _config_header(args, "knn-eval", seed=seed))
    return EXIT_OK


def cmd_inject(args) -> int:
    seed = _parse_seed(args.seed)
    labels = nio.read_labels(args.labels)
    if args.noise == "concentrated":
        if args.features is None:
            raise CliError("--features is required for concentrated noise")
        l = args.l
        alt = _parse_flip_map(args.alt_map, l)
        spec = NoiseSpec(
            "concentrated",
            seed,
            clusters_per_class=args.clusters,
            alternative_label_map=alt,
        )
        data = FeatureDataset(nio.read_features(args.features), labels, l)
        noisy, report = inject_concentrated_noise(data, spec)
    else:
        if args.gamma is None:
            raise CliError("--gamma is required for randomly-spread noise")
        gamma = float(args.gamma)
        if args.noise == "uniform":
            spec = NoiseSpec("uniform", seed, gamma=gamma, num_labels=args.l)
        elif args.noise == "flip":
            spec = NoiseSpec(
                "flip", seed, gamma=gamma, flip_map=_parse_flip_map(args.flip_map, args.l)
            )
        else:
            spec = NoiseSpec("matrix", seed, gamma=gamma, matrix=_load_matrix(args, args.l))
        noisy, report = inject_random_noise(labels, spec)
    nio.write_labels(args.out_labels, noisy)
    if args.out_report:
        payload = {
            "command": "inject",
            "noise": args.noise,
            "seed": seed,
            "nominal_gamma": report.nominal_gamma,
            "realized_noise_fraction": report.realized_noise_fraction,
            "num_corrupted": len(report.corrupted_indices),
            "corrupted_indices": sorted(report.corrupted_indices),
        }
        Path(args.out_report).write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.trials == 0:
        print("warning: trials=0, validation is vacuous")
        print("validate: PASS (no trials)")
        return EXIT_OK
    rng = np.random.Generator(np.random.Philox(args.seed))
    worst = 0.0
    worst_case = None
    failed = None
    for l in range(2, args.max_l + 1):
        for k in range(1, args.max_k + 1):
            for _ in range(args.trials):
                q = LabelDistribution(rng.dirichlet(np.ones(l)))
                correct = int(rng.integers(l))
                spec = NeighborhoodSpec(k=k, num_labels=l, correct_label=correct)
                analytic = plurality_accuracy(spec, q) + args.test_perturb
                exact = oracle.enumerate_accuracy(spec, q, budget=args.budget)
                dev = abs(analytic - exact.q_correct)
                if dev > worst:
                    worst = dev
                    worst_case = (k, l, q.probs.tolist())
                if dev > args.tolerance and failed is None:
                    failed = (k, l, q.probs.tolist(), dev)
    print(f"validate: max |analytic - enumerated| = {worst:.3e}")
    if failed is not None:
        k, l, q, dev = failed
        print(f"validate: FAIL at K={k}, L={l}, q={q} (deviation {dev:.3e})")
        return EXIT_VALIDATION
    print(f"validate: PASS (worst case K={worst_case[0]}, L={worst_case[1]})")
    return EXIT_OK


def cmd_softmax_compare(args) -> int:
    train = _load_dataset(args.train_features, args.train_labels, args.l)
    test_feats = nio.read_features(args.test_features)
    rows = nio.read_softmax_csv(args.softmax)
    if rows.shape[0] != test_feats.shape[0]:
        raise CliError("softmax rows and test features disagree in count")
    if rows.shape[1] != args.l:
        raise CliError(f"softmax rows have {rows.shape[1]} columns, expected {args.l}")
    k_range = range(args.k_min, args.k_max + 1, args.k_step)
    if args.k_min < 1 or args.k_max > len(train):
        raise CliError("k range must lie within [1, N_train]")
    results = []
    for i in range(test_feats.shape[0]):
        sums = rows[i].sum()
        softmax = LabelDistribution(rows[i] / sums)
        kstar, dist = knn.preferred_k(softmax, train, test_feats[i], k_range)
        results.append((i, kstar, dist))
    median = float(np.median([d for _, _, d in results]))
    lines = [f"# {k}={v}" for k, v in _config_header(args, "softmax-compare").items()]
    lines.append("sample,preferred_k,chi_square,median_chi_square")
    for i, kstar, dist in results:
        lines.append(f"{i},{kstar},{dist:.12g},{median:.12g}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"median chi-square distance: {median:.12g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisyknn",
        description="Analytic and empirical K-NN accuracy under label noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--threads", type=int, default=None, help="0 = all cores")

    def add_noise(p, regimes):
        p.add_argument("--noise", choices=regimes, required=True)
        p.add_argument("--matrix", help="corruption matrix CSV (matrix regime)")
        p.add_argument("--flip-map", help="comma-separated permutation or 'cyclic'")

    def add_gamma(p):
        p.add_argument("--gamma", help="comma-separated gamma values")
        p.add_argument("--gamma-grid", help="START:STOP:STEP")

    p = sub.add_parser("analytic", help="analytic accuracy-vs-noise curve")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    add_noise(p, ("uniform", "flip", "matrix"))
    add_gamma(p)
    p.add_argument(
        "--clean",
        choices=("point-mass", "knn-histogram", "softmax-file"),
        default="point-mass",
    )
    p.add_argument("--correct-label", type=int, default=0)
    p.add_argument("--train-features")
    p.add_argument("--train-labels")
    p.add_argument("--test-features")
    p.add_argument("--test-labels")
    p.add_argument("--softmax")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("knn-eval", help="empirical K-NN curve over injected noise")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    add_noise(p, ("uniform", "flip", "matrix"))
    add_gamma(p)
    p.add_argument("--train-features", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--test-features", required=True)
    p.add_argument("--test-labels", required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", required=True, help="integer or 'auto'")
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_knn_eval)

    p = sub.add_parser("inject", help="write a noisy label file plus a JSON report")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--labels", required=True)
    add_noise(p, ("uniform", "flip", "matrix", "concentrated"))
    p.add_argument("--gamma", type=float)
    p.add_argument("--features", help="feature file (concentrated regime)")
    p.add_argument("--clusters", type=int, help="clusters per class (concentrated)")
    p.add_argument("--alt-map", help="per-class target labels or 'cyclic'")
    p.add_argument("--seed", required=True, help="integer or 'auto'")
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-report")
    add_common(p)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("validate", help="check the analytic path against enumeration")
    p.add_argument("--max-k", type=int, default=8)
    p.add_argument("--max-l", type=int, default=4)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--budget", type=int, default=oracle.DEFAULT_STRING_BUDGET)
    p.add_argument(
        "--test-perturb",
        type=float,
        default=0.0,
        help="testing hook: bias added to the analytic value",
    )
    add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser(
        "softmax-compare",
        help="preferred K and chi-square distance between softmax vectors and K-NN histograms",
    )
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--train-features", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--test-features", required=True)
    p.add_argument("--softmax", required=True)
    p.add_argument("--k-min", type=int, default=10)
    p.add_argument("--k-max", type=int, default=300)
    p.add_argument("--k-step", type=int, default=10)
    p.add_argument("--out", required=True)
    add_common(p)
    p.set_defaults(func=cmd_softmax_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())

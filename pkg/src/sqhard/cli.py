"""Experiment harness: every module behind one seeded command-line tool.

Grammar: ``sqhard <subcommand> --config path [--seed N] [--threads N]
[--out path] [--format csv|json]``.  Configs are JSON records validated
per subcommand (unknown fields rejected); reports embed the config hash
and library version so runs are exactly reproducible.  Exit codes:
0 success, 2 config error, 3 runtime/feasibility failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys

import numpy as np

from . import __version__, correlation, covers, geometry, learners, quad1d, sqsim
from . import instance as inst_mod

SCHEMA_VERSION = 1

DEFAULTS = {
    "quadrature": {"mMin": 1, "mMax": 8, "momentMax": 8, "seed": 0},
    "instance": {
        "d": 64, "k": 4, "m": 6, "delta": None, "epsOrth": 0.5, "rho": 0.0,
        "rotated": False, "familySize": 1, "plantedIndex": 0, "nSamples": 10_000,
        "seed": 0,
    },
    "robustness": {
        "d": 64, "k": 4, "m": 6, "delta": None, "epsOrth": 0.5, "rho": 0.1,
        "nTrain": 200, "nTest": 2000, "epsMax": 0.4, "epsCount": 9, "nnTrain": 200,
        "seed": 0,
    },
    "sq": {
        "d": 8, "k": 2, "m": 2, "delta": 0.01, "epsOrth": 0.85, "familySize": 4,
        "tau": 0.05, "mode": "honest", "strategy": "support", "nQueries": 20,
        "budget": 200, "trials": 20, "seed": 0,
    },
    "chi": {
        "d": 16, "k": 2, "m": 2, "delta": None, "epsOrth": 0.5, "familySize": 2,
        "nSamples": 100_000, "seed": 0,
    },
    "cover": {
        "d": 8, "k": 1, "m": 2, "delta": 0.01, "epsOrth": 0.85, "familySize": 6,
        "nAtoms": 16, "epsilon": 1.0, "deltaTv": 0.25, "seed": 0,
    },
    "erm": {
        "d": 32, "k": 3, "m": 3, "delta": 0.005, "epsOrth": 0.6, "familySize": 8,
        "nTrain": 80, "nTest": 500, "epsilon": None, "trials": 5, "seed": 0,
    },
}


class ConfigError(ValueError):
    pass


def load_config(subcommand: str, path: str | None, overrides: dict) -> dict:
    config = dict(DEFAULTS[subcommand])
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        unknown = set(user) - set(config)
        if unknown:
            raise ConfigError(f"unknown config fields for {subcommand}: {sorted(unknown)}")
        config.update(user)
    for key, value in overrides.items():
        if value is not None:
            config[key] = value
    return config


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def report_envelope(subcommand: str, config: dict, results) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "version": __version__,
        "subcommand": subcommand,
        "configHash": config_hash(config),
        "config": config,
        "results": results,
    }


def rows_to_csv(rows: list[dict], header_comment: str) -> str:
    out = io.StringIO()
    out.write(f"# {header_comment}\n")
    if rows:
        cols = list(rows[0])
        out.write(",".join(cols) + "\n")
        for row in rows:
            out.write(",".join(str(row[c]) for c in cols) + "\n")
    return out.getvalue()


def emit(report: dict, rows: list[dict], out_path: str | None, fmt: str) -> None:
    if fmt == "csv":
        comment = (
            f"configHash={report['configHash']} version={report['version']} "
            f"schemaVersion={report['schemaVersion']}"
        )
        text = rows_to_csv(rows, comment)
    else:
        text = json.dumps(report, indent=2)
    if out_path is None:
        out_dir = os.environ.get("SQHARD_OUT_DIR")
        if out_dir:
            ext = "csv" if fmt == "csv" else "json"
            out_path = os.path.join(out_dir, f"{report['subcommand']}_{report['configHash']}.{ext}")
    if out_path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(out_path, "w") as fh:
            fh.write(text)
        print(f"wrote {out_path}")


def _build_instance(config: dict) -> inst_mod.HardInstance:
    return inst_mod.make_instance(
        d=config["d"],
        k=config["k"],
        m=config["m"],
        family_size=config.get("familySize", 1),
        eps_orth=config.get("epsOrth", 0.5),
        planted_index=config.get("plantedIndex", 0),
        rho=config.get("rho", 0.0),
        rotated=config.get("rotated", False),
        delta=config.get("delta"),
        seed=config["seed"],
    )


def cmd_quadrature(config: dict):
    if not 1 <= config["mMin"] <= config["mMax"] <= quad1d.MAX_ORDER:
        raise ConfigError(f"need 1 <= mMin <= mMax <= {quad1d.MAX_ORDER}")
    rows = []
    moments = {}
    for m in range(config["mMin"], config["mMax"] + 1):
        rule = quad1d.gauss_hermite_rule(m)
        for i, (node, weight) in enumerate(zip(rule.nodes, rule.weights)):
            rows.append({"m": m, "index": i, "node": node, "weight": weight})
        moments[str(m)] = {
            str(l): {
                "discrete": quad1d.discrete_moment(rule, l),
                "gaussian": quad1d.gaussian_moment(l),
            }
            for l in range(config["momentMax"] + 1)
        }
    return rows, {"table": rows, "moments": moments}


def cmd_instance(config: dict, out_path: str | None):
    if config["nSamples"] < 1:
        raise ConfigError("nSamples must be positive")
    instance = _build_instance(config)
    rows = []
    for label in (0, 1):
        pts = inst_mod.sample_points(
            instance, label, config["nSamples"], inst_mod.split_seed(config["seed"], label)
        )
        for p in pts:
            rows.append({**{f"x{i}": v for i, v in enumerate(p)}, "label": label})
    doc = json.loads(inst_mod.instance_to_json(instance))
    doc["padding"] = instance.ambient_dim - instance.pre_rotation_dim
    results = {"instance": doc, "nSamples": config["nSamples"]}
    if out_path:
        sample_path = out_path + ".samples.csv"
        with open(sample_path, "w") as fh:
            for row in rows:
                coords = [str(row[key]) for key in row if key != "label"]
                fh.write(",".join(coords + [str(row["label"])]) + "\n")
        results["sampleFile"] = sample_path
    return rows, results


def cmd_robustness(config: dict):
    instance = _build_instance(config)
    seed = config["seed"]
    tr0 = inst_mod.sample_points(instance, 0, config["nTrain"], inst_mod.split_seed(seed, 0))
    tr1 = inst_mod.sample_points(instance, 1, config["nTrain"], inst_mod.split_seed(seed, 1))
    te0 = inst_mod.sample_points(instance, 0, config["nTest"], inst_mod.split_seed(seed, 2))
    te1 = inst_mod.sample_points(instance, 1, config["nTest"], inst_mod.split_seed(seed, 3))
    n_nn = min(config["nnTrain"], config["nTrain"])
    classifiers = {
        "setVote": learners.SetVoteClassifier(instance),
        "linear": learners.fit_linear(tr0, tr1),
        "nearestNeighbor": learners.NearestNeighborClassifier(
            np.vstack([tr0[:n_nn], tr1[:n_nn]]),
            np.concatenate([np.zeros(n_nn, int), np.ones(n_nn, int)]),
        ),
    }
    eps_grid = np.linspace(0.0, config["epsMax"], config["epsCount"])
    rows = []
    for eps in eps_grid:
        for name, clf in classifiers.items():
            rep = learners.robust_loss(clf, te0, te1, float(eps))
            rows.append(
                {
                    "epsilon": float(eps),
                    "classifier": name,
                    "loss0": rep.per_class_loss[0],
                    "loss1": rep.per_class_loss[1],
                    "maxLoss": rep.max_loss,
                    "method": rep.method,
                }
            )
    results = {"table": rows, "setSeparation": inst_mod.set_separation(instance)}
    return rows, results


def cmd_sq(config: dict):
    if config["mode"] not in ("honest", "camouflage"):
        raise ConfigError("mode must be honest or camouflage")
    if config["strategy"] not in ("support", "random"):
        raise ConfigError("strategy must be support or random")
    base = _build_instance(config)

    def factory(planted, seed):
        return sqsim.SqOracle(
            inst_mod.with_planted_index(base, planted),
            tau=config["tau"],
            mode=config["mode"],
            budget=config["budget"],
            seed=seed,
        )

    if config["strategy"] == "support":
        learner = sqsim.make_support_mass_learner()
    else:
        learner = sqsim.make_random_query_learner(config["nQueries"], seed=config["seed"])
    acc = sqsim.distinguishing_game(
        factory, learner, config["familySize"], config["trials"], config["seed"]
    )
    row = {
        "tau": config["tau"],
        "mode": config["mode"],
        "strategy": config["strategy"],
        "trials": config["trials"],
        "accuracy": acc,
        "chance": 1.0 / config["familySize"],
    }
    return [row], row


def cmd_chi(config: dict):
    base = _build_instance(config)
    other = inst_mod.with_planted_index(base, 1 if len(base.family) > 1 else 0)
    same = correlation.chi_same(base)
    cross = correlation.chi_cross(base, other, config["nSamples"], config["seed"])
    rows = [
        {"quantity": "chiSame", "value": same.value, "stderr": same.stderr, "method": same.method},
        {"quantity": "chiCross", "value": cross.value, "stderr": cross.stderr, "method": cross.method},
    ]
    return rows, {"chiSame": json.loads(same.to_json()), "chiCross": json.loads(cross.to_json())}


def cmd_cover(config: dict):
    base = _build_instance(config)
    family = []
    for j in range(len(base.family)):
        member = inst_mod.with_planted_index(base, j)
        family.append(
            tuple(
                covers.uniform_empirical(
                    inst_mod.sample_points(
                        member, label, config["nAtoms"], inst_mod.split_seed(config["seed"], 2 * j + label)
                    )
                )
                for label in (0, 1)
            )
        )
    chosen, size = covers.greedy_cover(family, config["epsilon"], config["deltaTv"])
    rows = [{"familySize": len(family), "coverSize": size, "chosen": " ".join(map(str, chosen))}]
    return rows, {"coverIndices": chosen, "coverSize": size, "familySize": len(family)}


def cmd_erm(config: dict):
    base = _build_instance(config)
    epsilon = config["epsilon"]
    if epsilon is None:
        epsilon = 0.25 * inst_mod.set_separation(base)
    classifiers = [
        learners.SetVoteClassifier(inst_mod.with_planted_index(base, j))
        for j in range(len(base.family))
    ]
    rows = []
    hits = 0
    for trial in range(config["trials"]):
        seed = config["seed"]
        x0 = inst_mod.sample_points(base, 0, config["nTrain"], inst_mod.split_seed(seed, 10 * trial))
        x1 = inst_mod.sample_points(base, 1, config["nTrain"], inst_mod.split_seed(seed, 10 * trial + 1))
        chosen, reports = learners.erm_robust(classifiers, x0, x1, epsilon)
        idx = classifiers.index(chosen)
        te0 = inst_mod.sample_points(base, 0, config["nTest"], inst_mod.split_seed(seed, 10 * trial + 2))
        te1 = inst_mod.sample_points(base, 1, config["nTest"], inst_mod.split_seed(seed, 10 * trial + 3))
        test_loss = learners.robust_loss(chosen, te0, te1, epsilon).max_loss
        hits += idx == base.planted_index
        rows.append(
            {
                "trial": trial,
                "chosenIndex": idx,
                "correct": idx == base.planted_index,
                "empiricalMaxLoss": reports[idx].max_loss,
                "testMaxLoss": test_loss,
            }
        )
    return rows, {"table": rows, "epsilon": epsilon, "correctFraction": hits / config["trials"]}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqhard", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in DEFAULTS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1, help="accepted for interface parity; results are thread-count independent")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.subcommand, args.config, {"seed": args.seed})
        if args.subcommand == "quadrature":
            rows, results = cmd_quadrature(config)
        elif args.subcommand == "instance":
            rows, results = cmd_instance(config, args.out)
        elif args.subcommand == "robustness":
            rows, results = cmd_robustness(config)
        elif args.subcommand == "sq":
            rows, results = cmd_sq(config)
        elif args.subcommand == "chi":
            rows, results = cmd_chi(config)
        elif args.subcommand == "cover":
            rows, results = cmd_cover(config)
        else:
            rows, results = cmd_erm(config)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (geometry.InfeasibleFamilyError, RuntimeError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    emit(report_envelope(args.subcommand, config, results), rows, args.out, args.format)
    return 0


if __name__ == "__main__":
    sys.exit(main())

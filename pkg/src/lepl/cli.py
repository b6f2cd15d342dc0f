"""Command line front end.

Every subcommand is a thin shell around one pipeline stage: it resolves
its configuration, loads the referenced files, calls the library, writes
the declared outputs, and prints a one-line summary

    <subcommand> ok <key>=<value> ...

Configuration precedence is built-in defaults, then `key = value` lines
from --config, then explicit flags. Exit codes: 0 success, 2 usage or
configuration error, 3 data-format error, 4 numeric or runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from . import data, enhancement, graph as graph_mod, metrics as metrics_mod
from . import pseudo as pseudo_mod, theory as theory_mod, trainer as trainer_mod
from .seeding import stage_seed

PROG = "lepl"


class ConfigError(Exception):
    """Bad usage or configuration: unknown keys, unparseable or out-of-range
    values, missing input paths."""


@dataclass(frozen=True)
class Opt:
    kind: str  # int | float | str | bool | path
    default: object
    help: str


OPTIONS: dict[str, Opt] = {
    # randomness
    "seed": Opt("int", 0, "master seed; stage seeds derive from it"),
    # synthesis; defaults mirror the library dataclasses so they cannot drift
    "n_train": Opt("int", data.SynthConfig.n_train, "training instances"),
    "n_val": Opt("int", data.SynthConfig.n_val, "validation instances"),
    "n_test": Opt("int", data.SynthConfig.n_test, "test instances"),
    "classes": Opt("int", data.SynthConfig.C, "number of classes"),
    "dim": Opt("int", data.SynthConfig.d, "feature dimensionality"),
    "max_active": Opt("int", data.SynthConfig.max_active, "max active classes per instance"),
    "noise_sigma": Opt("float", data.SynthConfig.noise_sigma, "feature noise level"),
    # enhancement
    "tau": Opt("float", enhancement.LeConfig.tau, "contrastive temperature"),
    "knn": Opt("int", enhancement.LeConfig.K, "neighbors per instance"),
    "steps": Opt("int", enhancement.LeConfig.steps, "enhancement descent steps"),
    "le_lr": Opt("float", enhancement.LeConfig.lr, "enhancement learning rate"),
    "init_bg": Opt("float", None, "background soft label value (default 1/C)"),
    # training
    "epochs": Opt("int", trainer_mod.TrainConfig.epochs, "training epochs"),
    "lr": Opt("float", trainer_mod.TrainConfig.lr, "training learning rate"),
    "freeze_embeddings": Opt("bool", trainer_mod.TrainConfig.freeze_embeddings, "keep label embeddings fixed"),
    "ablation": Opt(
        "str",
        "enhancement,prior_pseudo,gcn",
        "comma list of enabled components (empty or 'none' disables all)",
    ),
    "embed_dim": Opt("int", None, f"label embedding width (default {trainer_mod.EMBED_WIDTH})"),
    "normalized": Opt("bool", False, "write the degree-normalized matrix"),
    # theory
    "xi": Opt("float", 0.0, "pseudo-label unreliability bound"),
    "c": Opt("int", 5, "class count for the bound"),
    "dh": Opt("int", 10, "hypothesis class capacity"),
    "eps": Opt("float", 0.1, "accuracy target"),
    "delta": Opt("float", 0.05, "confidence target"),
    "seeds": Opt("str", "0-9", "seed list, e.g. 0-9 or 0,2,5"),
    # paths
    "out_dir": Opt("path", None, "output directory"),
    "data_dir": Opt("path", None, "directory holding synth-named split files"),
    "features": Opt("path", None, "feature file"),
    "labels": Opt("path", None, "label file"),
    "votes": Opt("path", None, "annotation votes file"),
    "out": Opt("path", None, "output file"),
    "soft": Opt("path", None, "soft label file"),
    "observed": Opt("path", None, "observed partial label file"),
    "val_labels": Opt("path", None, "validation full label file"),
    "targets": Opt("path", None, "pseudo label file to train on"),
    "predict_features": Opt("path", None, "features to score after training"),
    "out_predictions": Opt("path", None, "prediction output file"),
    "embeddings": Opt("path", None, "label embedding file (default: seeded random)"),
    "predictions": Opt("path", None, "prediction file"),
    "out_text": Opt("path", None, "report text output"),
    "out_json": Opt("path", None, "report json output"),
    "out_table": Opt("path", None, "per-seed table output"),
}

COMMAND_OPTIONS: dict[str, list[str]] = {
    "synth": ["seed", "n_train", "n_val", "n_test", "classes", "dim", "max_active", "noise_sigma", "out_dir"],
    "aggregate": ["votes", "out"],
    "enhance": ["features", "labels", "out", "tau", "knn", "steps", "le_lr", "init_bg", "seed"],
    "pseudo": ["soft", "observed", "val_labels", "out"],
    "graph": ["val_labels", "out", "normalized"],
    "train": [
        "features", "targets", "val_labels", "predict_features", "out_predictions",
        "embeddings", "embed_dim", "epochs", "lr", "freeze_embeddings", "ablation", "seed",
    ],
    "evaluate": ["predictions", "labels", "out_text", "out_json"],
    "pipeline": [
        "data_dir", "out_dir", "seed", "tau", "knn", "steps", "le_lr", "init_bg",
        "epochs", "lr", "freeze_embeddings", "ablation", "embed_dim", "embeddings",
    ],
    "theory-n0": ["xi", "c", "dh", "eps", "delta"],
    "theory-compare": [
        "seeds", "out_table", "out_json", "n_train", "n_val", "n_test", "classes", "dim",
        "max_active", "noise_sigma", "tau", "knn", "steps", "le_lr", "init_bg",
        "epochs", "lr", "freeze_embeddings",
    ],
}

REQUIRED_PATHS: dict[str, list[str]] = {
    "synth": ["out_dir"],
    "aggregate": ["votes", "out"],
    "enhance": ["features", "labels", "out"],
    "pseudo": ["soft", "observed", "val_labels", "out"],
    "graph": ["val_labels", "out"],
    "train": ["features", "targets", "val_labels", "predict_features", "out_predictions"],
    "evaluate": ["predictions", "labels"],
    "pipeline": ["data_dir", "out_dir"],
    "theory-n0": [],
    "theory-compare": [],
}

# input path options get existence-checked at resolution time
INPUT_PATHS = {
    "votes", "features", "labels", "soft", "observed", "val_labels", "targets",
    "predict_features", "embeddings", "predictions", "data_dir",
}

SYNTH_FILES = {
    "train_features": "train_features.txt",
    "train_labels": "train_labels.txt",
    "train_true_labels": "train_true_labels.txt",
    "val_features": "val_features.txt",
    "val_labels": "val_labels.txt",
    "test_features": "test_features.txt",
    "test_labels": "test_labels.txt",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"{PROG}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _convert(name: str, raw, where: str):
    opt = OPTIONS[name]
    if raw is None or isinstance(raw, bool):
        return raw
    text = str(raw).strip()
    try:
        if opt.kind == "int":
            return int(text)
        if opt.kind == "float":
            return float(text)
        if opt.kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        return text
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {name}={text!r} as {opt.kind}") from None


def parse_config_file(path: str) -> dict[str, str]:
    """Flat `key = value` lines; full-line # comments and blanks ignored."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{line_no}: expected key = value, got {stripped!r}")
            key, _, value = stripped.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in OPTIONS:
                raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
            out[key] = value
    return out


def _resolve(cmd: str, args: argparse.Namespace) -> dict:
    """Apply precedence defaults < config file < flags, then check paths."""
    file_values: dict[str, str] = {}
    if getattr(args, "config", None):
        file_values = parse_config_file(args.config)
    values: dict = {}
    for name in COMMAND_OPTIONS[cmd]:
        flag_val = getattr(args, name, None)
        if flag_val is not None:
            values[name] = _convert(name, flag_val, "flag")
        elif name in file_values:
            values[name] = _convert(name, file_values[name], args.config)
        else:
            values[name] = OPTIONS[name].default
    for name in REQUIRED_PATHS[cmd]:
        if values.get(name) is None:
            raise ConfigError(f"missing required option --{name.replace('_', '-')}")
    for name in INPUT_PATHS:
        p = values.get(name)
        if p is not None and not os.path.exists(p):
            raise ConfigError(f"input path does not exist: {p} (--{name.replace('_', '-')})")
    return values


def _parse_ablation(text: str) -> frozenset:
    cleaned = text.strip().lower()
    if cleaned in ("", "none"):
        return frozenset()
    parts = [p.strip() for p in cleaned.split(",") if p.strip()]
    unknown = set(parts) - trainer_mod.ABLATION_COMPONENTS
    if unknown:
        raise ConfigError(f"unknown ablation components: {sorted(unknown)}")
    return frozenset(parts)


def _parse_seeds(text: str) -> tuple:
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "-" in chunk[1:]:
            lo, _, hi = chunk.partition("-")
            try:
                lo_i, hi_i = int(lo), int(hi)
            except ValueError:
                raise ConfigError(f"cannot parse seed range {chunk!r}") from None
            if hi_i < lo_i:
                raise ConfigError(f"empty seed range {chunk!r}")
            out.extend(range(lo_i, hi_i + 1))
        else:
            try:
                out.append(int(chunk))
            except ValueError:
                raise ConfigError(f"cannot parse seed {chunk!r}") from None
    if not out:
        raise ConfigError(f"no seeds in {text!r}")
    return tuple(out)


def _cfg(builder, **kwargs):
    """Build a config dataclass, mapping validation failures to ConfigError."""
    try:
        return builder(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _summary(cmd: str, pairs: list[tuple[str, object]]) -> str:
    body = " ".join(f"{k}={v}" for k, v in pairs)
    return f"{cmd} ok {body}" if body else f"{cmd} ok"


def _fmt(x: float) -> str:
    return data.format_float(float(x))


# --------------------------------------------------------------------------
# command bodies


def cmd_synth(v: dict) -> str:
    cfg = _cfg(
        data.SynthConfig,
        n_train=v["n_train"], n_val=v["n_val"], n_test=v["n_test"], C=v["classes"],
        d=v["dim"], max_active=v["max_active"], noise_sigma=v["noise_sigma"], seed=v["seed"],
    )
    splits = data.synth_generate(cfg)
    os.makedirs(v["out_dir"], exist_ok=True)
    j = lambda name: os.path.join(v["out_dir"], SYNTH_FILES[name])
    data.write_features(splits.train_x, j("train_features"))
    data.write_labels(splits.train_partial, j("train_labels"))
    data.write_labels(splits.train_true, j("train_true_labels"))
    data.write_features(splits.val_x, j("val_features"))
    data.write_labels(splits.val_full, j("val_labels"))
    data.write_features(splits.test_x, j("test_features"))
    data.write_labels(splits.test_full, j("test_labels"))
    return _summary("synth", [
        ("n_train", cfg.n_train), ("n_val", cfg.n_val), ("n_test", cfg.n_test),
        ("classes", cfg.C), ("seed", cfg.seed), ("out_dir", v["out_dir"]),
    ])


def cmd_aggregate(v: dict) -> str:
    votes = data.load_votes(v["votes"])
    full = data.majority_vote(votes)
    data.write_labels(full, v["out"])
    return _summary("aggregate", [("n", full.n), ("c", full.C), ("a", votes.A), ("out", v["out"])])


def cmd_enhance(v: dict) -> str:
    x = data.load_features(v["features"])
    observed = data.load_labels(v["labels"], "partial")
    cfg = _cfg(
        enhancement.LeConfig,
        tau=v["tau"], K=v["knn"], steps=v["steps"], lr=v["le_lr"],
        init_bg=v["init_bg"], seed=stage_seed(v["seed"], "enhance"),
    )
    d = enhancement.enhance(x, observed, cfg)
    enhancement.write_soft_labels(d, v["out"])
    return _summary("enhance", [("n", d.n), ("c", d.C), ("steps", cfg.steps), ("out", v["out"])])


def cmd_pseudo(v: dict) -> str:
    soft = enhancement.load_soft_labels(v["soft"])
    observed = data.load_labels(v["observed"], "partial")
    val = data.load_labels(v["val_labels"], "full")
    priors = pseudo_mod.estimate_priors(val, observed.n)
    out = pseudo_mod.generate(soft, priors, observed)
    pseudo_mod.write_pseudo_labels(out, v["out"])
    positives = int(out.values.sum())
    return _summary("pseudo", [("n", out.n), ("c", out.C), ("positives", positives), ("out", v["out"])])


def cmd_graph(v: dict) -> str:
    val = data.load_labels(v["val_labels"], "full")
    g = graph_mod.cooccurrence(val)
    if v["normalized"]:
        g = graph_mod.normalize(g)
    graph_mod.write_cooccurrence(g, v["out"], normalized=bool(v["normalized"]))
    return _summary("graph", [("c", g.C), ("normalized", str(bool(v["normalized"])).lower()), ("out", v["out"])])


def cmd_train(v: dict) -> str:
    x = data.load_features(v["features"])
    targets = pseudo_mod.load_pseudo_labels(v["targets"])
    val = data.load_labels(v["val_labels"], "full")
    predict_x = data.load_features(v["predict_features"])
    if targets.n != x.n:
        raise data.FormatError(
            v["targets"], 1,
            f"instance count mismatch: features have n={x.n}, targets have n={targets.n}",
        )
    if predict_x.d != x.d:
        raise data.FormatError(
            v["predict_features"], 1,
            f"dimensionality mismatch: training features d={x.d}, prediction features d={predict_x.d}",
        )
    cfg = _cfg(
        trainer_mod.TrainConfig,
        epochs=v["epochs"], lr=v["lr"], seed=v["seed"],
        freeze_embeddings=v["freeze_embeddings"], ablation=_parse_ablation(v["ablation"]),
    )
    if "gcn" in cfg.ablation:
        g = graph_mod.normalize(graph_mod.cooccurrence(val))
        if v["embeddings"] is not None:
            emb = graph_mod.load_embeddings(v["embeddings"])
        else:
            d_e = v["embed_dim"] if v["embed_dim"] is not None else trainer_mod.EMBED_WIDTH
            emb = graph_mod.random_embeddings(val.C, d_e, stage_seed(cfg.seed, "embeddings"))
        w0, w1 = trainer_mod.init_gcn_weights(
            emb.d_e, trainer_mod.HIDDEN_WIDTH, x.d, stage_seed(cfg.seed, "train")
        )
        result = trainer_mod.train(x, targets, g, emb, w0, w1, cfg)
        preds = trainer_mod.predict(result.params, predict_x)
        final = result.final_loss
    else:
        w_init = trainer_mod.init_linear_weights(targets.C, x.d, stage_seed(cfg.seed, "train"))
        w = trainer_mod.train_plain(x, targets, w_init, cfg)
        preds = trainer_mod.predict_linear(w, predict_x)
        final = trainer_mod.bce_loss(trainer_mod.predict_linear(w, x), targets)
    trainer_mod.write_predictions(preds, v["out_predictions"])
    return _summary("train", [
        ("epochs", cfg.epochs), ("final_loss", _fmt(final)), ("out", v["out_predictions"]),
    ])


def cmd_evaluate(v: dict) -> str:
    preds = trainer_mod.load_predictions(v["predictions"])
    truth = data.load_labels(v["labels"], "full")
    if preds.n != truth.n:
        raise data.FormatError(
            v["labels"], 1,
            f"instance count mismatch: predictions have n={preds.n}, labels have n={truth.n}",
        )
    if preds.C != truth.C:
        raise data.FormatError(
            v["labels"], 1,
            f"class count mismatch: predictions have c={preds.C}, labels have c={truth.C}",
        )
    report = metrics_mod.evaluate(preds, truth)
    if v["out_text"] or v["out_json"]:
        text = v["out_text"] or os.path.splitext(v["out_json"])[0] + ".txt"
        js = v["out_json"] or os.path.splitext(v["out_text"])[0] + ".json"
        trainer_mod.write_report(report, text, js)
    return _summary("evaluate", [(k, _fmt(val)) for k, val in report.as_dict().items()])


def _load_split_files(data_dir: str):
    paths = {k: os.path.join(data_dir, fname) for k, fname in SYNTH_FILES.items()}
    missing = [p for p in paths.values() if not os.path.isfile(p)]
    if missing:
        raise ConfigError(f"data directory {data_dir} is missing {os.path.basename(missing[0])}")
    return (
        data.load_features(paths["train_features"]),
        data.load_labels(paths["train_labels"], "partial"),
        data.load_features(paths["val_features"]),
        data.load_labels(paths["val_labels"], "full"),
        data.load_features(paths["test_features"]),
        data.load_labels(paths["test_labels"], "full"),
    )


def cmd_pipeline(v: dict) -> str:
    train_x, train_partial, val_x, val_full, test_x, test_full = _load_split_files(v["data_dir"])
    le_cfg = _cfg(
        enhancement.LeConfig,
        tau=v["tau"], K=v["knn"], steps=v["steps"], lr=v["le_lr"],
        init_bg=v["init_bg"], seed=stage_seed(v["seed"], "enhance"),
    )
    train_cfg = _cfg(
        trainer_mod.TrainConfig,
        epochs=v["epochs"], lr=v["lr"], seed=v["seed"],
        freeze_embeddings=v["freeze_embeddings"], ablation=_parse_ablation(v["ablation"]),
    )
    emb = None
    if v["embeddings"] is not None:
        emb = graph_mod.load_embeddings(v["embeddings"])
    elif v["embed_dim"] is not None:
        emb = graph_mod.random_embeddings(
            train_partial.C, v["embed_dim"], stage_seed(v["seed"], "embeddings")
        )
    preds, report = trainer_mod.run_pipeline(
        train_x, train_partial, val_x, val_full, test_x, test_full, le_cfg, train_cfg, emb=emb
    )
    os.makedirs(v["out_dir"], exist_ok=True)
    pred_path = os.path.join(v["out_dir"], "predictions.txt")
    trainer_mod.write_predictions(preds, pred_path)
    trainer_mod.write_report(
        report,
        os.path.join(v["out_dir"], "report.txt"),
        os.path.join(v["out_dir"], "report.json"),
    )
    pairs = [(k, _fmt(val)) for k, val in report.as_dict().items()]
    pairs.append(("out_dir", v["out_dir"]))
    return _summary("pipeline", pairs)


def cmd_theory_n0(v: dict) -> str:
    params = _cfg(
        theory_mod.TheoryParams,
        xi=v["xi"], d_H=v["dh"], epsilon=v["eps"], delta=v["delta"], C=v["c"],
    )
    n0 = theory_mod.sample_complexity(params)
    return _summary("theory-n0", [("n0", _fmt(n0)), ("theta", _fmt(params.theta))])


def cmd_theory_compare(v: dict) -> str:
    cfg = _cfg(
        data.SynthConfig,
        n_train=v["n_train"], n_val=v["n_val"], n_test=v["n_test"], C=v["classes"],
        d=v["dim"], max_active=v["max_active"], noise_sigma=v["noise_sigma"],
    )
    le_cfg = _cfg(
        enhancement.LeConfig,
        tau=v["tau"], K=v["knn"], steps=v["steps"], lr=v["le_lr"], init_bg=v["init_bg"],
    )
    train_cfg = _cfg(
        trainer_mod.TrainConfig,
        epochs=v["epochs"], lr=v["lr"], freeze_embeddings=v["freeze_embeddings"],
    )
    seeds = _parse_seeds(v["seeds"])
    result = theory_mod.compare_risks(cfg, le_cfg, train_cfg, seeds)
    if v["out_table"]:
        with open(v["out_table"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write("seed risk_pseudo risk_single xi_pseudo xi_single pseudo_wins\n")
            for i, seed in enumerate(result.seed_values):
                win = "1" if result.risks_pseudo[i] < result.risks_single[i] else "0"
                fh.write(
                    f"{seed} {_fmt(result.risks_pseudo[i])} {_fmt(result.risks_single[i])} "
                    f"{_fmt(result.xi_pseudo[i])} {_fmt(result.xi_single[i])} {win}\n"
                )
    if v["out_json"]:
        import json

        payload = {
            "seeds": list(result.seed_values),
            "risks_pseudo": list(result.risks_pseudo),
            "risks_single": list(result.risks_single),
            "xi_pseudo": list(result.xi_pseudo),
            "xi_single": list(result.xi_single),
            "wins_pseudo": result.wins_pseudo,
        }
        with open(v["out_json"], "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    mean_p = sum(result.risks_pseudo) / result.seeds
    mean_s = sum(result.risks_single) / result.seeds
    return _summary("theory-compare", [
        ("seeds", result.seeds), ("wins_pseudo", result.wins_pseudo),
        ("mean_risk_pseudo", _fmt(mean_p)), ("mean_risk_single", _fmt(mean_s)),
    ])


HANDLERS = {
    "synth": cmd_synth,
    "aggregate": cmd_aggregate,
    "enhance": cmd_enhance,
    "pseudo": cmd_pseudo,
    "graph": cmd_graph,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
    "theory-n0": cmd_theory_n0,
    "theory-compare": cmd_theory_compare,
}


def _add_command(sub, cmd: str, help_text: str):
    p = sub.add_parser(cmd, help=help_text, description=help_text)
    p.add_argument("--config", help="flat key = value config file")
    for name in COMMAND_OPTIONS[cmd]:
        opt = OPTIONS[name]
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None, help=opt.help)
    p.set_defaults(command=cmd)
    return p


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description="Weakly-supervised multi-label learning pipeline.")
    sub = parser.add_subparsers(dest="command_group", metavar="<command>")
    sub.required = True
    _add_command(sub, "synth", "generate the deterministic synthetic benchmark")
    _add_command(sub, "aggregate", "majority-vote annotator ballots into full labels")
    _add_command(sub, "enhance", "contrastive label enhancement to soft labels")
    _add_command(sub, "pseudo", "class-prior-guided pseudo-label generation")
    _add_command(sub, "graph", "export the label co-occurrence matrix")
    _add_command(sub, "train", "train the classifier and score a feature file")
    _add_command(sub, "evaluate", "score predictions against full labels")
    _add_command(sub, "pipeline", "run every stage end to end on split files")
    theory = sub.add_parser("theory", help="learnability calculators")
    tsub = theory.add_subparsers(dest="theory_command", metavar="<calc>")
    tsub.required = True
    t_n0 = tsub.add_parser("n0", help="sufficient pseudo-labeled sample size")
    t_n0.add_argument("--config", help="flat key = value config file")
    for name in COMMAND_OPTIONS["theory-n0"]:
        t_n0.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None, help=OPTIONS[name].help)
    t_n0.set_defaults(command="theory-n0")
    t_cmp = tsub.add_parser("compare", help="paired pseudo-vs-single risk experiment")
    t_cmp.add_argument("--config", help="flat key = value config file")
    for name in COMMAND_OPTIONS["theory-compare"]:
        t_cmp.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None, help=OPTIONS[name].help)
    t_cmp.set_defaults(command="theory-compare")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cmd = args.command
    try:
        values = _resolve(cmd, args)
        summary = HANDLERS[cmd](values)
    except ConfigError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except data.FormatError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # numeric or runtime failure in a stage
        print(f"{PROG}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())

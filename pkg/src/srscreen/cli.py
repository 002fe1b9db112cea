"""Command-line front end: evaluate, train, rank, sensitivity, audit, gen-synthetic.

Every option can also come from a key=value config file (--config); an
explicit command-line flag wins over the file, which wins over the
built-in default.  The fully resolved configuration is echoed into the
output directory so a run can be reproduced by feeding the echo back in.
"""

from __future__ import annotations

import dataclasses
import logging
import sys
from pathlib import Path

import click

from . import pipeline, reports, synth
from .boolquery import QueryConfigError
from .corpus import Corpus, CorpusError, load_corpus, save_corpus
from .evaluate import EvalError, ScoredDoc, audit_disagreements, cross_validate, sensitivity_sweep
from .forest import ForestConfig, ForestError
from .pipeline import ModelRecipe, PipelineError, ScreeningModel
from .select import SelectError
from .vectorize import VectorizeError

_CONFIG_ERRORS = (PipelineError, QueryConfigError, ForestError, VectorizeError)
_DATA_ERRORS = (CorpusError, EvalError, SelectError)


def _fail(kind: str, message: str, code: int) -> None:
    click.echo(f"{kind} error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _CONFIG_ERRORS as exc:
            _fail("config", str(exc), 2)
        except _DATA_ERRORS as exc:
            _fail("data", str(exc), 3)
        except OSError as exc:
            _fail("io", str(exc), 4)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _load_config_file(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    cfg: dict[str, str] = {}
    p = Path(path)
    if not p.exists():
        raise PipelineError(f"config file not found: {p}")
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise PipelineError(f"{p}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        cfg[key.strip()] = value.strip()
    return cfg


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _cast(key: str, raw: str, kind: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        return raw
    except ValueError:
        raise PipelineError(f"config key {key!r}: cannot parse {raw!r} as {kind}") from None


class _Resolver:
    """CLI flag > config file > default, recording resolved values for echo."""

    def __init__(self, config_path: str | None):
        self.file_values = _load_config_file(config_path)
        self.resolved: dict[str, object] = {}

    def get(self, key: str, cli_value, default=None, kind: str = "str"):
        if cli_value is not None:
            value = cli_value
        elif key in self.file_values:
            value = _cast(key, self.file_values[key], kind)
        else:
            value = default
        self.resolved[key] = value
        return value

    def require(self, key: str, cli_value, kind: str = "str"):
        value = self.get(key, cli_value, None, kind)
        if value is None:
            raise PipelineError(f"missing required option --{key} (or config key {key!r})")
        return value

    def echo_into(self, out_dir: Path) -> None:
        # "out" is the invocation's destination, not part of the computation;
        # leaving it out keeps echoes byte-identical across destinations.
        lines = [
            f"{key} = {str(value).lower() if isinstance(value, bool) else value}"
            for key, value in sorted(self.resolved.items())
            if value is not None and key not in ("config", "out")
        ]
        (out_dir / "resolved.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _setup_logging() -> None:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(message)s")


def _load_labeled_corpus(path: str, fmt: str) -> Corpus:
    corpus, report = load_corpus(path, fmt)
    logging.getLogger("srscreen").info(report.summary())
    return corpus


def _assets(res: _Resolver, lemmas, clusters, keywords, min_df) -> pipeline.Assets:
    return pipeline.load_assets(
        lemma_path=res.get("lemmas", lemmas),
        cluster_path=res.get("clusters", clusters),
        keyword_path=res.get("keywords", keywords),
        min_df=res.get("min-df", min_df, 1, "int"),
    )


def _forest_config(res: _Resolver, trees, mtry, max_depth, min_leaf, balance, threads, seed) -> ForestConfig:
    return ForestConfig(
        n_trees=res.get("trees", trees, 500, "int"),
        mtry=res.get("mtry", mtry, None, "int"),
        max_depth=res.get("max-depth", max_depth, None, "int"),
        min_leaf=res.get("min-leaf", min_leaf, 1, "int"),
        balance=res.get("balance", balance, "downsample_majority"),
        threads=res.get("threads", threads, 1, "int"),
        seed=seed,
    )


@click.group()
def main():
    """Document screening toolkit for systematic reviews."""
    _setup_logging()


_corpus_opts = [
    click.option("--config", type=str, default=None, help="key=value config file"),
    click.option("--corpus", type=str, default=None, help="corpus file path"),
    click.option("--format", "fmt", type=str, default=None, help="jsonl or csv"),
    click.option("--lemmas", type=str, default=None, help="lemma table path"),
    click.option("--clusters", type=str, default=None, help="cluster config path"),
    click.option("--keywords", type=str, default=None, help="keyword config path"),
    click.option("--min-df", type=int, default=None, help="minimum document frequency"),
]

_forest_opts = [
    click.option("--trees", type=int, default=None, help="number of trees"),
    click.option("--mtry", type=int, default=None, help="features tried per split"),
    click.option("--max-depth", type=int, default=None, help="depth cap"),
    click.option("--min-leaf", type=int, default=None, help="minimum samples per leaf"),
    click.option("--balance", type=str, default=None, help="downsample_majority or none"),
    click.option("--threads", type=int, default=None, help="training threads"),
]


def _add_options(options):
    def deco(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return deco


@main.command()
@_add_options(_corpus_opts)
@_add_options(_forest_opts)
@click.option("--models", type=str, default=None, help="comma list, e.g. model1,model2,model3:250")
@click.option("--k", type=int, default=None, help="cross-validation folds")
@click.option("--seed", type=int, default=None, help="master seed (required)")
@click.option("--target-recall", type=float, default=None, help="workload target recall")
@click.option("--selection", type=str, default=None, help="token selection: nested or pooled")
@click.option("--t-denominator", type=str, default=None, help="welch_se or unpooled_variance")
@click.option("--svg/--no-svg", "svg", default=None, help="write curve overlay SVGs")
@click.option("--out", type=str, default=None, help="output directory")
@_guarded
def evaluate(config, corpus, fmt, lemmas, clusters, keywords, min_df, trees, mtry,
             max_depth, min_leaf, balance, threads, models, k, seed, target_recall,
             selection, t_denominator, svg, out):
    """Cross-validated comparison of the requested model recipes."""
    res = _Resolver(config)
    corpus_path = res.require("corpus", corpus)
    fmt_v = res.get("format", fmt, "jsonl")
    seed_v = res.require("seed", seed, "int")
    k_v = res.get("k", k, 5, "int")
    models_v = res.get("models", models, "model1,model2,model3:250")
    target = res.get("target-recall", target_recall, 0.8, "float")
    selection_v = res.get("selection", selection, "nested")
    denominator_v = res.get("t-denominator", t_denominator, "welch_se")
    svg_v = res.get("svg", svg, False, "bool")
    out_dir = Path(res.require("out", out))
    assets = _assets(res, lemmas, clusters, keywords, min_df)
    forest_config = _forest_config(res, trees, mtry, max_depth, min_leaf, balance, threads, seed_v)

    recipes = [
        dataclasses.replace(ModelRecipe.parse(m), t_denominator=denominator_v)
        for m in models_v.split(",")
        if m.strip()
    ]
    if not recipes:
        raise PipelineError("no model recipes requested")
    loaded = _load_labeled_corpus(corpus_path, fmt_v)
    out_dir.mkdir(parents=True, exist_ok=True)
    res.echo_into(out_dir)
    all_reports = [
        cross_validate(
            loaded, recipe, k_v, seed_v,
            forest_config=forest_config, assets=assets, target_recall=target,
            selection=selection_v,
        )
        for recipe in recipes
    ]
    written = reports.write_eval_outputs(all_reports, out_dir, seed_v, svg=svg_v)
    for path in written:
        click.echo(str(path))


@main.command()
@_add_options(_corpus_opts)
@_add_options(_forest_opts)
@click.option("--model", type=str, default=None, help="model2 or model3:N")
@click.option("--seed", type=int, default=None, help="master seed (required)")
@click.option("--out", type=str, default=None, help="output directory")
@_guarded
def train(config, corpus, fmt, lemmas, clusters, keywords, min_df, trees, mtry,
          max_depth, min_leaf, balance, threads, model, seed, out):
    """Train a forest model on a fully labeled corpus and save the artifact."""
    res = _Resolver(config)
    corpus_path = res.require("corpus", corpus)
    fmt_v = res.get("format", fmt, "jsonl")
    seed_v = res.require("seed", seed, "int")
    recipe = ModelRecipe.parse(res.get("model", model, "model3:250"))
    out_dir = Path(res.require("out", out))
    assets = _assets(res, lemmas, clusters, keywords, min_df)
    forest_config = _forest_config(res, trees, mtry, max_depth, min_leaf, balance, threads, seed_v)

    loaded = _load_labeled_corpus(corpus_path, fmt_v)
    out_dir.mkdir(parents=True, exist_ok=True)
    res.echo_into(out_dir)
    model_obj, fitted = pipeline.fit_and_train(loaded, recipe, forest_config, assets)
    path = out_dir / f"model_{recipe.model_id}_seed{seed_v}.json"
    model_obj.save(path)
    click.echo(str(path))
    if fitted.ranking is not None:
        tokens_path = out_dir / f"tokens_{recipe.model_id}_seed{seed_v}.csv"
        reports.write_token_ranking_csv(fitted.ranking, tokens_path)
        click.echo(str(tokens_path))


@main.command()
@click.option("--config", type=str, default=None, help="key=value config file")
@click.option("--model-file", type=str, default=None, help="trained model artifact")
@click.option("--corpus", type=str, default=None, help="corpus file path (labels optional)")
@click.option("--format", "fmt", type=str, default=None, help="jsonl or csv")
@click.option("--lemmas", type=str, default=None, help="lemma table path")
@click.option("--out", type=str, default=None, help="output directory")
@_guarded
def rank(config, model_file, corpus, fmt, lemmas, out):
    """Score a corpus and write doc ids ranked by predicted relevance."""
    res = _Resolver(config)
    model_path = res.require("model-file", model_file)
    corpus_path = res.require("corpus", corpus)
    fmt_v = res.get("format", fmt, "jsonl")
    out_dir = Path(res.require("out", out))
    from .textprep import default_lemma_table_path, load_lemma_table

    lemma_table = load_lemma_table(res.get("lemmas", lemmas) or default_lemma_table_path())
    model_obj = ScreeningModel.load(model_path)
    loaded, report = load_corpus(corpus_path, fmt_v)
    logging.getLogger("srscreen").info(report.summary())
    out_dir.mkdir(parents=True, exist_ok=True)
    res.echo_into(out_dir)
    p_hat = model_obj.score(loaded, lemma_table)
    path = out_dir / f"ranked_{model_obj.recipe.model_id}_seed{model_obj.forest.config.seed}.csv"
    reports.write_ranked_csv(
        [(doc.id, float(p)) for doc, p in zip(loaded, p_hat)], path
    )
    click.echo(str(path))


@main.command()
@click.option("--config", type=str, default=None, help="key=value config file")
@click.option("--model-file", type=str, default=None, help="trained model artifact")
@click.option("--corpus", type=str, default=None, help="labeled corpus file path")
@click.option("--format", "fmt", type=str, default=None, help="jsonl or csv")
@click.option("--lemmas", type=str, default=None, help="lemma table path")
@click.option("--audit-high", type=float, default=None, help="high-confidence threshold")
@click.option("--audit-low", type=float, default=None, help="low-confidence threshold")
@click.option("--out", type=str, default=None, help="output directory")
@_guarded
def audit(config, model_file, corpus, fmt, lemmas, audit_high, audit_low, out):
    """List documents whose model score contradicts their manual label."""
    res = _Resolver(config)
    model_path = res.require("model-file", model_file)
    corpus_path = res.require("corpus", corpus)
    fmt_v = res.get("format", fmt, "jsonl")
    high = res.get("audit-high", audit_high, 0.9, "float")
    low = res.get("audit-low", audit_low, 0.1, "float")
    out_dir = Path(res.require("out", out))
    from .textprep import default_lemma_table_path, load_lemma_table

    lemma_table = load_lemma_table(res.get("lemmas", lemmas) or default_lemma_table_path())
    model_obj = ScreeningModel.load(model_path)
    loaded = _load_labeled_corpus(corpus_path, fmt_v)
    loaded.require_labeled()
    out_dir.mkdir(parents=True, exist_ok=True)
    res.echo_into(out_dir)
    p_hat = model_obj.score(loaded, lemma_table)
    scored = [ScoredDoc(d.id, d.label, float(p)) for d, p in zip(loaded, p_hat)]
    entries = audit_disagreements(scored, high=high, low=low)
    path = out_dir / f"audit_{model_obj.recipe.model_id}_seed{model_obj.forest.config.seed}.csv"
    reports.write_audit_csv(entries, path)
    click.echo(str(path))


@main.command()
@_add_options(_corpus_opts)
@_add_options(_forest_opts)
@click.option("--model", type=str, default=None, help="model2 or model3:N")
@click.option("--fractions", type=str, default=None, help="comma list of training fractions")
@click.option("--replicates", type=int, default=None, help="replicates per fraction")
@click.option("--seed", type=int, default=None, help="master seed (required)")
@click.option("--svg/--no-svg", "svg", default=None, help="write sensitivity SVG")
@click.option("--out", type=str, default=None, help="output directory")
@_guarded
def sensitivity(config, corpus, fmt, lemmas, clusters, keywords, min_df, trees, mtry,
                max_depth, min_leaf, balance, threads, model, fractions, replicates,
                seed, svg, out):
    """Sweep the training fraction and record mean AUCs on held-out data."""
    res = _Resolver(config)
    corpus_path = res.require("corpus", corpus)
    fmt_v = res.get("format", fmt, "jsonl")
    seed_v = res.require("seed", seed, "int")
    recipe = ModelRecipe.parse(res.get("model", model, "model3:250"))
    fractions_v = res.get("fractions", fractions, "0.01,0.02,0.05,0.1,0.2,0.4,0.6,0.8")
    replicates_v = res.get("replicates", replicates, 5, "int")
    svg_v = res.get("svg", svg, False, "bool")
    out_dir = Path(res.require("out", out))
    assets = _assets(res, lemmas, clusters, keywords, min_df)
    forest_config = _forest_config(res, trees, mtry, max_depth, min_leaf, balance, threads, seed_v)
    try:
        fraction_values = tuple(float(f) for f in fractions_v.split(",") if f.strip())
    except ValueError:
        raise PipelineError(f"cannot parse fractions list {fractions_v!r}") from None

    loaded = _load_labeled_corpus(corpus_path, fmt_v)
    out_dir.mkdir(parents=True, exist_ok=True)
    res.echo_into(out_dir)
    points = sensitivity_sweep(
        loaded, recipe, fraction_values, seed_v,
        replicates=replicates_v, forest_config=forest_config, assets=assets,
    )
    written = reports.write_sensitivity_outputs(points, recipe.model_id, out_dir, seed_v, svg=svg_v)
    for path in written:
        click.echo(str(path))


@main.command("gen-synthetic")
@click.option("--config", type=str, default=None, help="key=value config file")
@click.option("--n-docs", type=int, default=None, help="corpus size")
@click.option("--seed", type=int, default=None, help="generator seed")
@click.option("--out", type=str, default=None, help="output JSONL path")
@_guarded
def gen_synthetic(config, n_docs, seed, out):
    """Write the documented synthetic screening corpus as JSONL."""
    res = _Resolver(config)
    n_v = res.get("n-docs", n_docs, 10000, "int")
    seed_v = res.get("seed", seed, 1, "int")
    out_path = Path(res.require("out", out))
    corpus = synth.generate_corpus(n_v, seed_v)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, out_path, "jsonl")
    click.echo(str(out_path))


if __name__ == "__main__":
    main()

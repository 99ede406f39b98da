"""Command-line entry point: ``ticketclf <verb> [options]``.

Any option may also come from a JSON object passed with ``--config``; keys are
option names with dashes replaced by underscores, and explicit flags win.
Exit codes: 0 success, 1 usage, 2 data/validation error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .classifiers import ClassifierSpec
from .evaluation import format_reports, reports_json, run_ablation, evaluate_setting, setting
from .features import DEFAULT_K
from .genetic import GaBounds, GaConfig, evolve, load_best
from .grid_search import DEFAULT_GRIDS, grid_search
from .ingest import (CorpusError, JiraClient, TicketNotFound, TransportError, attach_labels,
                     corpus_stats, format_stats, load_corpus, load_curation, load_raw_tickets,
                     save_corpus)
from .mlp import TrainingDivergedError
from .pipeline import BundleError, TrainedPipeline, fit_pipeline, ticket_from_payload
from .sparse import save_triplets
from .text import ENGLISH_STOP_WORDS, PipelineConfig, fit_transform

logger = logging.getLogger("ticketclf")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(path, text: str) -> None:
    Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _resolved(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")}


def _ga_individual(args):
    if getattr(args, "individual", None):
        ind, _ = load_best(args.individual)
        return ind.n_features, ind.layers
    from .evaluation import BEST_INDIVIDUAL
    return BEST_INDIVIDUAL


def _setting(args):
    return setting(args.setting, individual=_ga_individual(args), n_features=args.features)


def cmd_ingest(args) -> int:
    curation = load_curation(args.curation)
    failures = {}
    if args.raw:
        raw = load_raw_tickets(args.raw)
    else:
        if not (args.keys and args.endpoint):
            raise UsageError("ingest needs --raw, or --keys together with --endpoint")
        keys = [k.strip() for k in Path(args.keys).read_text(encoding="utf-8").splitlines()
                if k.strip() and not k.startswith("#")]
        raw, failures = JiraClient(args.endpoint).fetch_many(keys, max_workers=args.workers)
    corpus = attach_labels(raw, curation)
    save_corpus(corpus, args.out)
    if failures:
        manifest = Path(str(args.out) + ".failures.json")
        _write(manifest, json.dumps({"failures": failures, "config": _resolved(args)}, indent=2))
        print(f"{len(failures)} tickets failed; see {manifest}", file=sys.stderr)
    print(format_stats(*corpus_stats(corpus)))
    return EXIT_RUNTIME if failures else EXIT_OK


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(ngram_min=args.ngram_min, ngram_max=args.ngram_max,
                          max_df_ratio=args.max_df, min_df_docs=args.min_df,
                          summary_repeats=args.summary_repeats, sublinear_tf=not args.raw_tf,
                          stop_words=ENGLISH_STOP_WORDS if args.stop_words == "english" else None)


def cmd_preprocess(args) -> int:
    corpus = load_corpus(args.corpus)
    model, X = fit_transform(corpus, _pipeline_config(args))
    model.save(args.out_model)
    save_triplets(X, args.out_matrix)
    if args.out_labels:
        _write(args.out_labels, "\n".join(str(v) for v in corpus.labels()))
    print(f"{X.shape[0]} documents x {X.shape[1]} features")
    return EXIT_OK


def cmd_grid_search(args) -> int:
    corpus = load_corpus(args.corpus)
    _, X = fit_transform(corpus, PipelineConfig(ngram_min=1, ngram_max=3))
    y = corpus.labels()
    k = min(args.features, X.shape[1])
    chunks = []
    for kind in args.kinds.split(","):
        result = grid_search(kind, DEFAULT_GRIDS[kind], X, y, args.folds, args.seed, n_features=k)
        chunks.append(f"# {kind}: best {result.best_params} mean F1 {result.best_score:.4f}")
        chunks.append(result.format())
    chunks.append("# config " + json.dumps(_resolved(args)))
    text = "\n".join(chunks)
    if args.out:
        _write(args.out, text)
    print(text)
    return EXIT_OK


def cmd_ga(args) -> int:
    if args.pop < 2:
        raise UsageError("--pop must be at least 2")
    corpus = load_corpus(args.corpus)
    _, X = fit_transform(corpus, PipelineConfig(ngram_min=1, ngram_max=3))
    hi = min(args.features_max, X.shape[1])
    lo = min(args.features_min, hi)
    cfg = GaConfig(population_size=args.pop, generations=args.gens, p_ret=args.p_ret,
                   p_mut=args.p_mut, p_sel=args.p_sel, seed=args.seed,
                   bounds=GaBounds(n_features=(lo, hi)))
    result = evolve(X, corpus.labels(), cfg)
    log = result.format_log() + "\n# config " + json.dumps(_resolved(args))
    _write(args.log, log)
    result.save_best(args.best)
    print(f"best {result.best} fitness {result.best.fitness:.4f}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    if not args.ablation and args.setting not in range(1, 6):
        raise UsageError("--setting must be 1-5")
    corpus = load_corpus(args.corpus)
    per_project = not args.cross_only
    if args.ablation:
        settings = [setting(i, individual=_ga_individual(args), n_features=args.features) for i in range(1, 6)]
        reports = run_ablation(corpus, args.folds, args.seed, settings, per_project)
    else:
        reports = [evaluate_setting(corpus, _setting(args), args.folds, args.seed, per_project)]
    table = format_reports(reports)
    if args.out_table:
        _write(args.out_table, table)
    if args.out_json:
        _write(args.out_json, reports_json(reports, _resolved(args)))
    print(table)
    return EXIT_OK


def cmd_train(args) -> int:
    corpus = load_corpus(args.corpus)
    cfg = _setting(args)
    pipe = fit_pipeline(corpus, cfg.pipeline, cfg.n_features, ClassifierSpec("MLP", cfg.mlp.to_dict()))
    pipe.save(args.out)
    print(f"trained setting {cfg.id} pipeline on {len(corpus)} tickets -> {args.out}")
    return EXIT_OK


def cmd_classify(args) -> int:
    pipe = TrainedPipeline.load(args.bundle)
    payload = json.loads(Path(args.tickets).read_text(encoding="utf-8"))
    records = payload if isinstance(payload, list) else [payload]
    tickets = []
    for i, rec in enumerate(records):
        try:
            tickets.append(ticket_from_payload(rec, key=f"#{i}"))
        except ValueError as exc:
            raise CorpusError(f"ticket {i}: {exc} (expected {{'summary': str, 'description': str}})") from exc
    for r in pipe.classify(tickets):
        prob = "" if r["probability"] is None else f"{r['probability']:.6f}"
        print(f"{r['key']}\t{r['label']}\t{prob}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve

    serve(args.bundle, args.host, args.port)
    return EXIT_OK


def _add_setting_opts(p):
    p.add_argument("--setting", type=int, default=5)
    p.add_argument("--features", type=int, default=DEFAULT_K,
                   help="chi-square feature count for settings 3-4")
    p.add_argument("--individual", help="GA best-individual JSON used by setting 5")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ticketclf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def verb(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file of option defaults")
        p.set_defaults(func=func)
        return p

    p = verb("ingest", cmd_ingest, "build a labeled corpus JSON")
    p.add_argument("--curation", required=True, help="key<TAB>classification file")
    p.add_argument("--raw", help="offline JSON list of unlabeled tickets")
    p.add_argument("--keys", help="file of ticket keys to fetch")
    p.add_argument("--endpoint", help="issue tracker base URL")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--out", required=True)

    p = verb("preprocess", cmd_preprocess, "fit TF-IDF and write model + matrix")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ngram-min", type=int, default=1)
    p.add_argument("--ngram-max", type=int, default=3)
    p.add_argument("--max-df", type=float, default=0.5)
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--summary-repeats", type=int, default=3)
    p.add_argument("--raw-tf", action="store_true", help="disable 1 + ln(tf) attenuation")
    p.add_argument("--stop-words", choices=("none", "english"), default="none",
                   help="drop English function words before building n-grams")
    p.add_argument("--out-model", required=True)
    p.add_argument("--out-matrix", required=True)
    p.add_argument("--out-labels")

    p = verb("grid-search", cmd_grid_search, "k-fold grid search per classifier kind")
    p.add_argument("--corpus", required=True)
    p.add_argument("--kinds", default="MLP,SGD,RIDGE,KNN")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--features", type=int, default=DEFAULT_K)
    p.add_argument("--out")

    p = verb("ga", cmd_ga, "genetic search of MLP structure")
    p.add_argument("--corpus", required=True)
    p.add_argument("--pop", type=int, default=50)
    p.add_argument("--gens", type=int, default=150)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-ret", type=float, default=0.2)
    p.add_argument("--p-mut", type=float, default=0.1)
    p.add_argument("--p-sel", type=float, default=0.3)
    p.add_argument("--features-min", type=int, default=20_000)
    p.add_argument("--features-max", type=int, default=60_000)
    p.add_argument("--log", required=True, help="per-generation TSV log")
    p.add_argument("--best", required=True, help="best individual JSON")

    p = verb("evaluate", cmd_evaluate, "k-fold evaluation of a setting or the ablation")
    p.add_argument("--corpus", required=True)
    _add_setting_opts(p)
    p.add_argument("--ablation", action="store_true")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cross-only", action="store_true", help="skip per-project evaluation")
    p.add_argument("--out-table")
    p.add_argument("--out-json")

    p = verb("train", cmd_train, "train a pipeline bundle")
    p.add_argument("--corpus", required=True)
    _add_setting_opts(p)
    p.add_argument("--out", required=True)

    p = verb("classify", cmd_classify, "classify tickets with a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--tickets", required=True, help="JSON object or list with summary/description")

    p = verb("serve", cmd_serve, "serve POST /classify over HTTP")
    p.add_argument("--bundle", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def parse_args(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    verbs = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in verbs), None)
    if known.config and command:
        try:
            defaults = json.loads(Path(known.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            parser.exit(EXIT_USAGE, f"ticketclf: cannot read config {known.config}: {exc}\n")
        if not isinstance(defaults, dict):
            parser.exit(EXIT_USAGE, "ticketclf: config file must hold a JSON object\n")
        defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
        sub = verbs[command]
        # file values become defaults, so explicit flags still win
        sub.set_defaults(**defaults)
        for action in sub._actions:
            if action.dest in defaults:
                action.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ticketclf: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, BundleError, ValueError, KeyError, OSError) as exc:
        if isinstance(exc, CorpusError) and hasattr(exc, "keys"):
            print("ticketclf: unlabeled tickets: " + ", ".join(exc.keys), file=sys.stderr)
        else:
            print(f"ticketclf: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TransportError, TicketNotFound, TrainingDivergedError) as exc:
        print(f"ticketclf: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

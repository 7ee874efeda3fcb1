"""Command-line interface.

Subcommands: ``explain`` (one-shot script -> bundle), ``session`` (interactive
read-eval loop), ``grammar`` (accept / next / generate / tree), ``serve``
(HTTP service), ``export`` (bundle -> self-contained HTML), and ``report``
(bundle -> figures plus CSV tables).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bundle import parse_bundle, serialize_bundle
from .data import load_dataset
from .errors import IemaError
from .grammar import iema_grammar, render_tree
from .html_export import export_html
from .models import load_model, schema_from_dataset
from .report import write_report
from .session import Session

ENV_SEED = "IEMA_SEED"


def _default_seed(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_SEED)
    return int(env) if env else 0


def _sidecar_config(data_path: Path) -> dict:
    sidecar = data_path.with_name(data_path.stem + ".config.json")
    if sidecar.exists():
        return json.loads(sidecar.read_text(encoding="utf-8"))
    return {}


def _load_pair(args) -> tuple:
    data_path = Path(args.data)
    config = _sidecar_config(data_path)
    target = args.target or config.get("target")
    if not target:
        raise IemaError("no target column: pass --target or provide a sidecar config")
    dataset = load_dataset(
        data_path.read_bytes(),
        target=target,
        types=config.get("types"),
        name=data_path.stem,
    )
    model = load_model(Path(args.model).read_bytes(), schema_from_dataset(dataset))
    seed = args.seed if args.seed is not None else config.get("seed")
    return dataset, model, _default_seed(seed)


def _print_payload_summary(step, out) -> None:
    payload = step.payload
    if "contributions" in payload:
        parts = ", ".join(f"{c['variable']}={c['value']:+.3g}" for c in payload["contributions"])
        print(f"  baseline {payload['baseline']:.4g} | {parts}", file=out)
    elif "entries" in payload:
        parts = ", ".join(f"{e['variable']}={e['estimate']:.3g}" for e in payload["entries"])
        print(f"  {payload['method']}: {parts}", file=out)
    elif "values" in payload and "grid" in payload:
        vals = payload["values"]
        print(f"  {len(vals)} grid points, range [{min(vals):.4g}, {max(vals):.4g}]", file=out)
    elif "bins" in payload:
        print(f"  {payload['kind']} of {payload['column']}", file=out)
    elif "selected" in payload:
        print(f"  variable in focus: {payload['selected']}", file=out)
    else:
        print(f"  payload keys: {sorted(payload)}", file=out)


# -- subcommand implementations ----------------------------------------------------


def _cmd_explain(args, out) -> int:
    dataset, model, seed = _load_pair(args)
    script = json.loads(Path(args.script).read_text(encoding="utf-8"))
    session = Session(dataset, model, seed=seed)
    for entry in script:
        session.apply_step(entry["symbol"], entry.get("params"))
    text = serialize_bundle(session.export_bundle())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote bundle with {len(session.history)} steps to {args.out}", file=out)
    else:
        out.write(text)
    return 0


def _cmd_session(args, out) -> int:
    dataset, model, seed = _load_pair(args)
    session = Session(dataset, model, seed=seed)
    print(f"dataset {dataset.name}: {dataset.n_rows} rows; model {model.id}", file=out)
    print("enter a step as SYMBOL [key=value ...]; also: undo, export PATH, quit", file=out)
    while True:
        ns = session.next_steps()
        print(f"\nnext steps: {', '.join(ns.terminals)}"
              + (" (dialogue may stop here)" if ns.end_of_dialogue else ""), file=out)
        out.flush()
        line = sys.stdin.readline()
        if not line:
            break
        words = line.strip().split()
        if not words:
            continue
        command = words[0]
        if command in ("quit", "exit"):
            break
        if command == "undo":
            try:
                session.undo()
                print("undone", file=out)
            except IemaError as e:
                print(f"error: {e}", file=out)
            continue
        if command == "export":
            path = words[1] if len(words) > 1 else "bundle.json"
            Path(path).write_text(serialize_bundle(session.export_bundle()), encoding="utf-8")
            print(f"wrote {path}", file=out)
            continue
        params = {}
        for word in words[1:]:
            if "=" not in word:
                print(f"error: expected key=value, got {word!r}", file=out)
                break
            key, value = word.split("=", 1)
            try:
                params[key] = json.loads(value)
            except json.JSONDecodeError:
                params[key] = value
        else:
            try:
                step = session.apply_step(command, params)
                print(f"applied {command}", file=out)
                _print_payload_summary(step, out)
            except IemaError as e:
                print(f"error: {e}", file=out)
    return 0


def _cmd_grammar(args, out) -> int:
    g = iema_grammar()
    if args.grammar_command == "accept":
        outcome = g.accepts(args.symbols)
        if outcome.accepted:
            print(render_tree(outcome.tree), file=out)
            return 0
        print(f"rejected; longest valid prefix: {outcome.valid_prefix_len}", file=out)
        return 1
    if args.grammar_command == "next":
        ns = g.next_steps(args.symbols)
        print(" ".join(ns.terminals), file=out)
        print(f"end_of_dialogue: {str(ns.end_of_dialogue).lower()}", file=out)
        return 0
    if args.grammar_command == "generate":
        sentence, tree = g.generate(args.max, args.seed)
        print(" ".join(sentence) if sentence else "(empty sentence)", file=out)
        print(render_tree(tree), file=out)
        return 0
    if args.grammar_command == "tree":
        outcome = g.accepts(args.symbols)
        if not outcome.accepted:
            print(f"rejected; longest valid prefix: {outcome.valid_prefix_len}", file=out)
            return 1
        json.dump(outcome.tree.to_nodes(), out, indent=2)
        out.write("\n")
        return 0
    raise IemaError(f"unknown grammar command {args.grammar_command!r}")


def _cmd_serve(args, out) -> int:
    from .service import run_service

    dataset, model, seed = _load_pair(args)
    ui_asset = Path(args.ui).read_text(encoding="utf-8") if args.ui else None
    print(f"serving {dataset.name} on port {args.port}", file=out)
    run_service(dataset, model, port=args.port, seed=seed, ui_asset=ui_asset,
                snapshot_dir=args.snapshot_dir)
    return 0


def _cmd_export(args, out) -> int:
    text = Path(args.bundle).read_text(encoding="utf-8")
    ui_asset = Path(args.ui).read_text(encoding="utf-8") if args.ui else None
    html = export_html(text, ui_asset=ui_asset)
    Path(args.out).write_text(html, encoding="utf-8")
    print(f"wrote {args.out}", file=out)
    return 0


def _cmd_report(args, out) -> int:
    doc = parse_bundle(Path(args.bundle).read_text(encoding="utf-8"))
    written = write_report(doc, args.out)
    print(f"wrote {len(written)} files to {args.out}", file=out)
    return 0


# -- argument wiring -------------------------------------------------------------------


def _add_pair_flags(sub) -> None:
    sub.add_argument("--data", required=True, help="CSV file (a .config.json sidecar is honored)")
    sub.add_argument("--model", required=True, help="model spec JSON")
    sub.add_argument("--target", default=None, help="target column (overrides the sidecar)")
    sub.add_argument("--seed", type=int, default=None,
                     help=f"seed (default: sidecar, then ${ENV_SEED}, then 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iema",
        description="Grammar-driven explanatory analysis of tabular predictive models.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    explain = commands.add_parser("explain", help="run a step script, emit the bundle")
    _add_pair_flags(explain)
    explain.add_argument("--script", required=True, help="JSON list of {symbol, params} steps")
    explain.add_argument("--out", default=None, help="bundle path (default: stdout)")
    explain.set_defaults(func=_cmd_explain)

    session = commands.add_parser("session", help="interactive dialogue on stdin/stdout")
    _add_pair_flags(session)
    session.set_defaults(func=_cmd_session)

    grammar = commands.add_parser("grammar", help="membership, next steps, generation, trees")
    gsub = grammar.add_subparsers(dest="grammar_command", required=True)
    for name, needs_symbols in (("accept", True), ("next", True), ("tree", True)):
        p = gsub.add_parser(name)
        if needs_symbols:
            p.add_argument("symbols", nargs="*")
    generate = gsub.add_parser("generate")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--max", type=int, default=50, help="expansion budget")
    grammar.set_defaults(func=_cmd_grammar)

    serve = commands.add_parser("serve", help="start the HTTP service")
    _add_pair_flags(serve)
    serve.add_argument("--port", type=int, default=8050)
    serve.add_argument("--ui", default=None, help="JavaScript bundle replacing the built-in viewer")
    serve.add_argument("--snapshot-dir", default=None,
                       help="write every session's bundle here on shutdown")
    serve.set_defaults(func=_cmd_serve)

    export = commands.add_parser("export", help="bundle -> one self-contained HTML file")
    export.add_argument("bundle", help="bundle JSON path")
    export.add_argument("--out", required=True, help="HTML output path")
    export.add_argument("--ui", default=None, help="JavaScript bundle replacing the built-in viewer")
    export.set_defaults(func=_cmd_export)

    report = commands.add_parser("report", help="bundle -> figures and CSV tables")
    report.add_argument("bundle", help="bundle JSON path")
    report.add_argument("--out", required=True, help="output directory")
    report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except IemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: solve a scenario, step a saved session, print
model stats, or run the HTTP service.

Session files written by ``solve --session`` and advanced by ``step`` use
the same snapshot format the service persists, so a file can move freely
between the CLI and a service state directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import RestoError
from .mdp import dump_mdp, mdp_stats
from .planner import (
    Observation,
    apply_observation,
    expected_sequence,
    load_snapshot,
    recommend,
    session_from_scenario,
    snapshot,
)
from .scenario import load_scenario


def format_action(action) -> str:
    return "{" + ",".join(str(j) for j in action) + "}"


def parse_action(raw: str):
    text = raw.strip().strip("{}")
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise RestoError(f"bad action {raw!r}", path="action")


def parse_outcomes(raw: str) -> dict[int, str]:
    out: dict[int, str] = {}
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        sep = "=" if "=" in item else ":"
        branch, _, status = item.partition(sep)
        try:
            out[int(branch)] = status.strip()
        except ValueError:
            raise RestoError(f"bad outcome item {item!r}", path="observe")
    if not out:
        raise RestoError("no outcomes given", path="observe")
    return out


def _write_json_atomic(path: str, doc: dict) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def cmd_solve(args) -> int:
    scn = load_scenario(args.scenario)
    sess = session_from_scenario(scn, simplify=not args.no_simplify)
    if args.target is not None:
        from .planner import retarget

        sess = retarget(sess, args.target)
    print(f"states={sess.mdp.n_states} value={sess.current_value!r}")
    seq = expected_sequence(sess)
    print("sequence:", " ".join(format_action(a) for a in seq) if seq else "(none)")
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            dump_mdp(sess.mdp, fh)
        print(f"dump written to {args.dump}")
    if args.session:
        _write_json_atomic(args.session, snapshot(sess))
        print(f"session written to {args.session}")
    return 0


def cmd_step(args) -> int:
    try:
        with open(args.session, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise RestoError(f"cannot read session file: {exc}")
    except json.JSONDecodeError as exc:
        raise RestoError(f"session file is not valid JSON: {exc}")
    sess = load_snapshot(doc)
    if args.action is not None:
        action = parse_action(args.action)
    else:
        action = recommend(sess)
        if action is None:
            raise RestoError("session is already at its goal; nothing to step")
    outcomes = parse_outcomes(args.observe)
    apply_observation(sess, Observation(action=action, outcomes=outcomes))
    _write_json_atomic(args.session, snapshot(sess))
    nxt = recommend(sess)
    print(f"state={sess.current_state}")
    print(f"next={format_action(nxt) if nxt is not None else 'terminal'}")
    print(f"value={sess.current_value!r}")
    return 0


def cmd_stats(args) -> int:
    scn = load_scenario(args.scenario)
    sess = session_from_scenario(scn, simplify=not args.no_simplify)
    stats = {
        **mdp_stats(sess.mdp),
        "forbid_source_island_merge": sess.forbid_source_island_merge,
        "value": sess.current_value,
    }
    print(json.dumps(stats, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resto",
        description="Restoration decision support: solve, step, stats, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a scenario and print the plan")
    p_solve.add_argument("scenario", help="scenario JSON file")
    p_solve.add_argument("--no-simplify", action="store_true",
                         help="use the full action family instead of maximal sets")
    p_solve.add_argument("--target", metavar="BUS",
                         help="minimize expected steps to energize this bus")
    p_solve.add_argument("--dump", metavar="PATH", help="write the MDP dump here")
    p_solve.add_argument("--session", metavar="PATH",
                         help="write a session file to advance with 'step'")
    p_solve.set_defaults(func=cmd_solve)

    p_step = sub.add_parser("step", help="apply an observation to a session file")
    p_step.add_argument("session", help="session JSON file (rewritten in place)")
    p_step.add_argument("--observe", required=True, metavar="OUTCOMES",
                        help="per-branch outcomes, e.g. '1=D,4=E'")
    p_step.add_argument("--action", metavar="BRANCHES",
                        help="branches closed (defaults to the recommendation)")
    p_step.set_defaults(func=cmd_step)

    p_stats = sub.add_parser("stats", help="print model statistics for a scenario")
    p_stats.add_argument("scenario", help="scenario JSON file")
    p_stats.add_argument("--no-simplify", action="store_true",
                         help="use the full action family instead of maximal sets")
    p_stats.set_defaults(func=cmd_stats)

    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--state-dir", default=None,
                         help="session snapshot directory (or RESTO_STATE_DIR)")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RestoError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

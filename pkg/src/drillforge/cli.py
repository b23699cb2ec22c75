"""Command-line tool: author drill sets, run cohort simulations, inspect
grades, manage the ledger, and launch the HTTP service.

Exit codes: 0 success, 2 validation error, 3 I/O error. A --config JSON file
supplies defaults per command section; explicit flags always win.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path
from typing import Optional

from .errors import DrillforgeError, NotFoundError, ValidationError
from .grading import GradingConfig, drill_grade
from .itemgen import GenConfig, OptionPools, generate_drill_set
from .ledger import AccountKind, RewardRuleSet
from .platform import Platform, replay
from .simulate import CohortSpec, run_simulation
from .storage import EventLog, load_drill_set, save_drill_set
from .templates import Template, generate_from_template

DATA_ENV = "DRILLFORGE_DATA"


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ValidationError(f"config {path}: invalid JSON at offset {err.pos}") from err
    if not isinstance(config, dict):
        raise ValidationError(f"config {path}: top level must be an object")
    return config


def pick(flag_value, config: dict, section: str, key: str, default):
    """Resolution order: explicit flag, config section entry, built-in default."""
    if flag_value is not None:
        return flag_value
    return config.get(section, {}).get(key, default)


def grading_from_config(config: dict) -> GradingConfig:
    return GradingConfig(**config.get("grading", {}))


def rewards_from_config(config: dict) -> RewardRuleSet:
    return RewardRuleSet(**config.get("rewards", {}))


def data_dir(args, config: dict) -> Path:
    explicit = getattr(args, "data", None)
    path = explicit or config.get("data") or os.environ.get(DATA_ENV) or "data"
    return Path(path)


def open_platform(args, config: dict) -> Platform:
    directory = data_dir(args, config)
    directory.mkdir(parents=True, exist_ok=True)
    return Platform(
        log=EventLog(directory / "events.jsonl"),
        grading_cfg=grading_from_config(config),
        reward_rules=rewards_from_config(config),
    )


def emit(obj) -> None:
    print(json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=True))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    config = load_config(args.config)
    pools_path = pick(args.pools, config, "generate", "pools", None)
    if not pools_path:
        raise ValidationError("generate requires --pools")
    try:
        pools_doc = json.loads(Path(pools_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ValidationError(f"{pools_path}: invalid JSON at offset {err.pos}") from err
    pools = OptionPools.from_dict(pools_doc)

    header = ""
    header_path = pick(args.header, config, "generate", "header", None)
    if header_path:
        header = Path(header_path).read_text(encoding="utf-8").strip()

    gen_section = {
        k: v for k, v in config.get("generate", {}).items()
        if k in ("lambda", "k_min", "k_max", "p_nota", "p_aota",
                 "p_nota_correct", "p_aota_correct")
    }
    if "lambda" in gen_section:
        gen_section["lam"] = gen_section.pop("lambda")
    cfg = GenConfig(
        n_items=pick(args.n, config, "generate", "n", 100),
        seed=pick(args.seed, config, "generate", "seed", 0),
        **gen_section,
    )
    ds = generate_drill_set(pools, header, cfg, set_id=args.set_id, title=args.title or "")
    out = pick(args.out, config, "generate", "out", "set.json")
    save_drill_set(ds, out)
    print(f"wrote {out}: {len(ds.items)} items in set {ds.id}")
    return 0


def cmd_template(args) -> int:
    config = load_config(args.config)
    in_path = pick(args.template, config, "template", "in", None)
    if not in_path:
        raise ValidationError("template requires --in")
    try:
        doc = json.loads(Path(in_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ValidationError(f"{in_path}: invalid JSON at offset {err.pos}") from err
    if args.seed is not None:
        doc["seed"] = args.seed
    tmpl = Template.from_dict(doc)
    ds = generate_from_template(tmpl)
    out = pick(args.out, config, "template", "out", "set.json")
    save_drill_set(ds, out)
    print(f"wrote {out}: {len(ds.items)} items in set {ds.id}")
    return 0


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    spec = CohortSpec(
        n_students=pick(args.students, config, "simulate", "students", 10),
        ability=pick(args.ability, config, "simulate", "ability", 0.8),
        sets=pick(args.sets, config, "simulate", "sets", 5),
        policy=pick(args.policy, config, "simulate", "policy", "until_ace"),
        answers_per_set=pick(args.answers, config, "simulate", "answers", 30),
        items_per_set=pick(args.items, config, "simulate", "items", 10),
        seed=pick(args.seed, config, "simulate", "seed", 0),
    )
    report = run_simulation(
        spec,
        grading_cfg=grading_from_config(config),
        reward_rules=rewards_from_config(config),
    )
    out = pick(args.out, config, "simulate", "out", None)
    if out:
        Path(out).write_text(report.to_json(), encoding="utf-8")
        print(f"wrote {out}")
    else:
        sys.stdout.write(report.to_json())
    return 0


def cmd_grade(args) -> int:
    config = load_config(args.config)
    log_path = pick(args.log, config, "grade", "log", None)
    if log_path:
        log = EventLog(log_path)
    else:
        log = EventLog(data_dir(args, config) / "events.jsonl")
    state = replay(log)
    log.close()
    if args.student not in state.profiles:
        raise NotFoundError(f"unknown account {args.student!r}")
    if args.set not in state.drill_sets:
        raise NotFoundError(f"unknown drill set {args.set!r}")
    grade = drill_grade(
        state.history(args.student, args.set), grading_from_config(config)
    )
    emit(grade.to_dict())
    return 0


def cmd_upload(args) -> int:
    config = load_config(args.config)
    ds = load_drill_set(args.set)
    platform = open_platform(args, config)
    platform.upload_drill_set(ds, collection_id=args.collection)
    platform.log.close()
    print(f"uploaded set {ds.id} ({len(ds.items)} items)")
    return 0


def cmd_library(args) -> int:
    config = load_config(args.config)
    platform = open_platform(args, config)
    library_id = platform.register_library(
        name=args.name, tablet_count=args.tablets
    )
    platform.log.close()
    print(f"registered library {library_id} with {args.tablets} tablets")
    return 0


def cmd_account(args) -> int:
    config = load_config(args.config)
    platform = open_platform(args, config)
    profile = platform.create_account(
        AccountKind(args.kind), library_id=args.library, display_name=args.name or ""
    )
    platform.log.close()
    emit(
        {
            "account_id": profile.account_id,
            "kind": profile.kind.value,
            "library_id": profile.library_id,
            "token": profile.token,
        }
    )
    return 0


def cmd_ledger(args) -> int:
    config = load_config(args.config)
    platform = open_platform(args, config)
    try:
        if args.ledger_cmd == "balance":
            emit(
                {
                    "account_id": args.account,
                    "balance": platform.balance(args.account),
                }
            )
        elif args.ledger_cmd == "mint":
            platform.mint(args.to, args.amount, memo=args.memo)
            print(f"minted {args.amount} to {args.to}")
        elif args.ledger_cmd == "transfer":
            platform.transfer(args.src, args.to, args.amount, memo=args.memo)
            print(f"transferred {args.amount} from {args.src} to {args.to}")
    finally:
        platform.log.close()
    return 0


def _librarian_token(directory: Path, flag: Optional[str], config: dict) -> str:
    token = flag or config.get("serve", {}).get("librarian_token")
    if token:
        return token
    token_path = directory / "librarian_token"
    if token_path.exists():
        return token_path.read_text(encoding="utf-8").strip()
    token = secrets.token_hex(16)
    token_path.write_text(token + "\n", encoding="utf-8")
    print(f"librarian token written to {token_path}")
    return token


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    directory = data_dir(args, config)
    directory.mkdir(parents=True, exist_ok=True)
    platform = open_platform(args, config)
    token = _librarian_token(directory, args.librarian_token, config)
    app = create_app(
        platform,
        librarian_token=token,
        stats_ttl=pick(args.stats_ttl, config, "serve", "stats_ttl", 600.0),
    )
    host = pick(args.host, config, "serve", "host", "127.0.0.1")
    port = pick(args.port, config, "serve", "port", 8080)
    uvicorn.run(app, host=host, port=port)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drillforge",
        description="Adaptive drilling platform: authoring, simulation, service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", help="JSON config file with per-command defaults")
        p.add_argument("--data", help=f"data directory (default ${DATA_ENV} or ./data)")

    p = sub.add_parser("generate", help="compile option pools into a drill set")
    common(p)
    p.add_argument("--pools", help="pools JSON file (correct + distractors)")
    p.add_argument("--header", help="file with the set header text")
    p.add_argument("--n", type=int, help="number of items (default 100)")
    p.add_argument("--seed", type=int, help="generation seed (default 0)")
    p.add_argument("--out", help="output drill set file (default set.json)")
    p.add_argument("--set-id", dest="set_id", help="explicit drill set id")
    p.add_argument("--title", help="drill set title")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("template", help="expand a parameterized template into a drill set")
    common(p)
    p.add_argument("--in", dest="template", help="template JSON file")
    p.add_argument("--seed", type=int, help="override the template's seed")
    p.add_argument("--out", help="output drill set file (default set.json)")
    p.set_defaults(func=cmd_template)

    p = sub.add_parser("simulate", help="run a cohort simulation")
    common(p)
    p.add_argument("--students", type=int, help="cohort size (default 10)")
    p.add_argument("--ability", type=float, help="per-answer correctness probability (default 0.8)")
    p.add_argument("--sets", type=int, help="drill sets in the collection (default 5)")
    p.add_argument("--policy", choices=["until_ace", "fixed"], help="stopping policy (default until_ace)")
    p.add_argument("--answers", type=int, help="answers per set under fixed policy (default 30)")
    p.add_argument("--items", type=int, help="items per generated set (default 10)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("grade", help="compute a grade from an event log")
    common(p)
    p.add_argument("--log", help="event log file (default <data>/events.jsonl)")
    p.add_argument("--student", required=True, help="account id")
    p.add_argument("--set", required=True, help="drill set id")
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("upload", help="upload a drill set into the data directory")
    common(p)
    p.add_argument("--set", required=True, help="drill set JSON file")
    p.add_argument("--collection", help="collection id to attach the set to")
    p.set_defaults(func=cmd_upload)

    p = sub.add_parser("library", help="register a library with tablet stock")
    common(p)
    p.add_argument("--name", default="", help="display name")
    p.add_argument("--tablets", type=int, default=10, help="initial tablet stock (default 10)")
    p.set_defaults(func=cmd_library)

    p = sub.add_parser("account", help="create an account and print its token")
    common(p)
    p.add_argument("--kind", default="pre_registered",
                   choices=[k.value for k in AccountKind])
    p.add_argument("--library", help="home library id")
    p.add_argument("--name", help="display name")
    p.set_defaults(func=cmd_account)

    p = sub.add_parser("serve", help="launch the HTTP service")
    common(p)
    p.add_argument("--host", help="bind host (default 127.0.0.1)")
    p.add_argument("--port", type=int, help="bind port (default 8080)")
    p.add_argument("--librarian-token", dest="librarian_token",
                   help="token authorizing pre-registered account creation")
    p.add_argument("--stats-ttl", dest="stats_ttl", type=float,
                   help="library stats cache TTL in seconds (default 600)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ledger", help="inspect or move SMLY balances")
    ledger_sub = p.add_subparsers(dest="ledger_cmd", required=True)

    q = ledger_sub.add_parser("balance", help="print an account balance")
    common(q)
    q.add_argument("account")
    q.set_defaults(func=cmd_ledger)

    q = ledger_sub.add_parser("mint", help="mint new SMLY to an account")
    common(q)
    q.add_argument("to")
    q.add_argument("amount", type=int)
    q.add_argument("--memo", default="")
    q.set_defaults(func=cmd_ledger)

    q = ledger_sub.add_parser("transfer", help="move SMLY between accounts")
    common(q)
    q.add_argument("src")
    q.add_argument("to")
    q.add_argument("amount", type=int)
    q.add_argument("--memo", default="")
    q.set_defaults(func=cmd_ledger)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DrillforgeError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands: run, analyze-order, bounds, search, worst-case, spne,
check-axioms, experiment. Inputs are JSON files (orders, profiles), outputs
are JSON on stdout (CSV for experiments). Exit codes: 0 success, 1 invalid
input or execution failure, 2 capacity or budget refusal.
"""

from __future__ import annotations

import argparse
import json
import sys

from .adversarial import (
    ConstructionError,
    near_optimal_allocation,
    worst_case_profile,
)
from .axioms import (
    Exhaustive,
    Sampled,
    bossy_conditional_sd,
    check_all,
    non_neutral_conditional_sd,
    sd_direct,
    welfare_maximizer,
    worst_pick_sd,
)
from .bounds import search_orders, worst_case_report
from .domain import (
    Allocation,
    CapacityError,
    DomainShape,
    Profile,
    ValidationError,
    allocation_to_json,
    egalitarian_rank,
    profile_from_json,
    profile_to_json,
    utilitarian_rank,
)
from .engine import OPTIMISTIC, PESSIMISTIC, ExecutionError, Scripted, run_csam
from .mallows import (
    DEFAULT_GRID,
    ExperimentConfig,
    MechanismConfig,
    results_to_csv,
    run_experiment,
)
from .orders import order_from_json, order_to_json
from .spne import DEFAULT_STATE_CAP, solve_spne, state_space_size


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _parse_behaviors(text: str, n: int):
    tokens = text.split(",")
    if len(tokens) != n:
        raise ValidationError(f"behavior list {text!r} has {len(tokens)} entries, expected {n}")
    out = []
    for tok in tokens:
        tok = tok.strip()
        if tok == "opt":
            out.append(OPTIMISTIC)
        elif tok == "pess":
            out.append(PESSIMISTIC)
        elif tok.startswith("script:"):
            picks = _load_json(tok.split(":", 1)[1])
            if not isinstance(picks, list):
                raise ValidationError(f"script file for {tok!r} must hold a JSON list of items")
            out.append(Scripted(tuple(int(x) for x in picks)))
        else:
            raise ValidationError(f"unknown behavior {tok!r} (use opt, pess, or script:FILE)")
    return out


def _parse_int_list(text: str) -> tuple[int, ...]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(x) for x in text.split(","))


def _print(doc) -> None:
    print(json.dumps(doc, indent=2))


def _ranks_doc(profile: Profile, allocation: Allocation) -> dict:
    ranks = {str(j): profile.pref(j).rank_of(allocation[j]) for j in profile.shape.agents()}
    return {
        "allocation": allocation_to_json(allocation),
        "ranks": ranks,
        "utilitarian": utilitarian_rank(profile, allocation),
        "egalitarian": egalitarian_rank(profile, allocation),
    }


def _cmd_run(args) -> int:
    order = order_from_json(_load_json(args.order))
    profile = profile_from_json(_load_json(args.profile))
    behaviors = _parse_behaviors(args.behaviors, order.shape.n)
    allocation, trace = run_csam(order, profile, behaviors)
    if args.trace:
        for record in trace.rounds:
            print(json.dumps(record.to_json()))
    doc = _ranks_doc(profile, allocation)
    doc["message_count"] = trace.message_count
    _print(doc)
    return 0


def _cmd_analyze_order(args) -> int:
    order = order_from_json(_load_json(args.order))
    analytics = order.analytics
    shape = order.shape
    doc = {
        "n": shape.n,
        "p": shape.p,
        "rounds": [list(r) for r in order.rounds],
        "agents": [
            {
                "agent": j,
                "suborder": list(analytics.suborder(j)),
                "slacks": {str(i): analytics.slack(j, i) for i in shape.categories()},
                "uninterrupted_index": analytics.uninterrupted_index(j),
            }
            for j in shape.agents()
        ],
        "message_count": (1 + shape.n * shape.p) * shape.n,
    }
    _print(doc)
    return 0


def _cmd_bounds(args) -> int:
    order = order_from_json(_load_json(args.order))
    behaviors = _parse_behaviors(args.behaviors, order.shape.n)
    _print(worst_case_report(order, behaviors).to_json())
    return 0


def _cmd_search(args) -> int:
    behaviors = _parse_behaviors(args.behaviors, args.n)
    result = search_orders(
        args.n,
        args.p,
        behaviors,
        objective=args.objective,
        mode=args.mode,
        seed=args.seed,
        budget=args.budget,
    )
    _print(
        {
            "order": order_to_json(result.order),
            "score": result.score,
            "objective": args.objective,
            "evaluated": result.evaluated,
        }
    )
    return 0


def _cmd_worst_case(args) -> int:
    order = order_from_json(_load_json(args.order))
    behaviors = _parse_behaviors(args.behaviors, order.shape.n)
    profile = worst_case_profile(order, behaviors)
    allocation, _ = run_csam(order, profile, behaviors)
    near = near_optimal_allocation(order, profile)
    doc = {
        "profile": profile_to_json(profile),
        "bounds": worst_case_report(order, behaviors).to_json(),
        "realized": _ranks_doc(profile, allocation),
        "near_optimal": _ranks_doc(profile, near),
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(profile_to_json(profile), fh, indent=2)
    _print(doc)
    return 0


def _cmd_spne(args) -> int:
    order = order_from_json(_load_json(args.order))
    profile = profile_from_json(_load_json(args.profile))
    allocation, trace = solve_spne(
        order, profile, state_cap=args.state_cap, collect_trace=args.trace
    )
    if args.trace:
        for step in trace:
            print(
                json.dumps(
                    {
                        "t": step.t,
                        "agent": step.agent,
                        "category": step.category,
                        "item": step.item,
                    }
                )
            )
    doc = _ranks_doc(profile, allocation)
    if args.states:
        doc["state_space_size"] = state_space_size(order)
    _print(doc)
    return 0


_MECHANISMS = {
    "sd": lambda n: sd_direct(list(range(1, n + 1))),
    "welfare": lambda n: welfare_maximizer(),
    "bossy-sd": lambda n: bossy_conditional_sd(),
    "nonneutral-sd": lambda n: non_neutral_conditional_sd(),
    "worst-pick-sd": lambda n: worst_pick_sd(list(range(1, n + 1))),
}


def _cmd_check_axioms(args) -> int:
    mechanism = _MECHANISMS[args.mechanism](args.n)
    shape = DomainShape(args.n, args.p)
    if args.mode == "exhaustive":
        mode = Exhaustive(budget=args.budget)
    else:
        mode = Sampled(count=args.count, seed=args.seed)
    verdicts = check_all(mechanism, shape, mode)
    _print({"mechanism": mechanism.name, "verdicts": [v.to_json() for v in verdicts]})
    return 0


def _cmd_experiment(args) -> int:
    mechanisms = DEFAULT_GRID
    if args.mechanisms:
        parsed = []
        for tok in args.mechanisms.split(","):
            family, _, behavior = tok.partition(":")
            parsed.append(MechanismConfig(family.strip(), behavior.strip()))
        mechanisms = tuple(parsed)
    config = ExperimentConfig(
        p=args.p,
        n_values=_parse_int_list(args.n),
        phis=tuple(float(x) for x in args.phi.split(",")),
        samples=args.samples,
        seed=args.seed,
        mechanisms=mechanisms,
        check_bounds=args.check_bounds,
    )
    csv_text = results_to_csv(run_experiment(config))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catdom",
        description="Sequential allocation on categorized domains: execution, "
        "worst-case analysis, equilibria, axioms, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="play a picking order against a profile")
    run.add_argument("--order", required=True)
    run.add_argument("--profile", required=True)
    run.add_argument("--behaviors", required=True, help="comma list: opt|pess|script:FILE")
    run.add_argument("--trace", action="store_true")
    run.set_defaults(handler=_cmd_run)

    ana = sub.add_parser("analyze-order", help="per-agent order analytics")
    ana.add_argument("--order", required=True)
    ana.set_defaults(handler=_cmd_analyze_order)

    bnd = sub.add_parser("bounds", help="worst-case rank bounds for an order")
    bnd.add_argument("--order", required=True)
    bnd.add_argument("--behaviors", required=True)
    bnd.set_defaults(handler=_cmd_bounds)

    srch = sub.add_parser("search", help="optimize worst-case bounds over orders")
    srch.add_argument("--n", type=int, required=True)
    srch.add_argument("--p", type=int, required=True)
    srch.add_argument("--behaviors", required=True)
    srch.add_argument("--objective", choices=["utilitarian", "egalitarian"], default="egalitarian")
    srch.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive")
    srch.add_argument("--seed", type=int, default=0)
    srch.add_argument("--budget", type=int, default=200_000)
    srch.set_defaults(handler=_cmd_search)

    wc = sub.add_parser("worst-case", help="construct a tight adversarial profile")
    wc.add_argument("--order", required=True)
    wc.add_argument("--behaviors", required=True)
    wc.add_argument("--out", help="also write the profile JSON to this path")
    wc.set_defaults(handler=_cmd_worst_case)

    sp = sub.add_parser("spne", help="subgame-perfect equilibrium outcome")
    sp.add_argument("--order", required=True)
    sp.add_argument("--profile", required=True)
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--states", action="store_true", help="report reachable state count")
    sp.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    sp.set_defaults(handler=_cmd_spne)

    ax = sub.add_parser("check-axioms", help="audit a direct mechanism")
    ax.add_argument("--mechanism", choices=sorted(_MECHANISMS), required=True)
    ax.add_argument("--n", type=int, required=True)
    ax.add_argument("--p", type=int, required=True)
    ax.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    ax.add_argument("--count", type=int, default=1000, help="draws in sampled mode")
    ax.add_argument("--seed", type=int, default=0)
    ax.add_argument("--budget", type=int, default=10_000_000)
    ax.set_defaults(handler=_cmd_check_axioms)

    ex = sub.add_parser("experiment", help="Mallows expected-rank study, CSV output")
    ex.add_argument("--p", type=int, default=2)
    ex.add_argument("--n", required=True, help="range like 2..11 or comma list")
    ex.add_argument("--phi", required=True, help="comma list of dispersions in (0,1]")
    ex.add_argument("--samples", type=int, default=2000)
    ex.add_argument("--seed", type=int, default=0)
    ex.add_argument("--out", help="CSV path (stdout when absent)")
    ex.add_argument("--mechanisms", help="comma list like sd:opt,balanced:pess")
    ex.add_argument("--check-bounds", action="store_true")
    ex.set_defaults(handler=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValidationError, ExecutionError, ConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

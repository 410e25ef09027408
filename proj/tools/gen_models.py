"""Regenerate the JSON model files under models/."""

import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "models"


def birth_death(d, up, down):
    rates = [{"from": x, "to": x + 1, "expr": up} for x in range(d - 1)]
    rates += [{"from": x, "to": x - 1, "expr": down} for x in range(1, d)]
    return {"states": d, "rates": rates}


def prendiville():
    d, n = 11, 10
    return {
        "name": "prendiville",
        "model": birth_death(d, "(10 - x) * (2 + 0.5 * sin(2 * pi * t))", "x * (3 - 2 * exp(-t / 4))"),
        "rewards": {
            "rate": [{"state": "all", "expr": "x * (7 * t - floor(7 * t)) + 0.1"}],
            "jump": [{"from": x, "to": x + 1, "dist": {"kind": "deterministic", "value": 1}} for x in range(d - 1)]
            + [{"from": x, "to": x - 1, "dist": {"kind": "deterministic", "value": 5}} for x in range(1, d)],
            "scheduled": {
                "times": {"kind": "arithmetic", "start": 5, "step": 5},
                "dist": {"kind": "deterministic", "value": "x"},
            },
            "external": {
                "intensity": [{"state": "all", "expr": "0.25 * (2 + sin(2 * pi * t))"}],
                "dist_per_state": [
                    {
                        "kind": "affine_beta_sum",
                        "offset": 2,
                        "components": [
                            {"count": x, "alpha": 2, "beta": 5, "scale": 3},
                            {"count": n - x, "alpha": 2, "beta": 5, "scale": 6},
                        ],
                    }
                    for x in range(d)
                ],
            },
        },
        "initial": {"kind": "point", "state": 0},
        "breakpoints": {"period": 1, "offsets": [k / 7 for k in range(7)]},
        "bounds": {
            "lambda_bar": [(n - x) * 2.5 + x * 3.0 for x in range(d)],
            "beta_bar": [0.75] * d,
        },
    }


def mm1k():
    d = 31
    mu0 = 25 + 10 * math.sin(-math.pi / 12)
    return {
        "name": "mm1k",
        "model": birth_death(d, "12 + 10 * sin(pi * t)", "25 + 10 * sin(pi / 3 * (t - 1 / 4))"),
        "rewards": {"rate": [{"state": "all", "expr": "x + 1"}]},
        "initial": {"kind": "truncated_geometric", "ratio": 12 / mu0},
        "bounds": {"lambda_bar": [(22.0 if x + 1 < d else 0.0) + (35.0 if x > 0 else 0.0) for x in range(d)]},
    }


def mmck_stationary(lam, mu, servers, capacity):
    w, p = 1.0, []
    for x in range(capacity + 1):
        if x > 0:
            w *= lam / (mu * min(x, servers))
        p.append(w)
    total = sum(p)
    return [v / total for v in p]


def multiserver():
    d = 81
    j = "floor(t - 3 * floor(t / 3))"
    servers = f"(30 - 10 * {j} + 7.5 * {j} * ({j} - 1))"
    return {
        "name": "multiserver",
        "model": birth_death(
            d,
            "35 + 10 * cos(2 * pi / 3 * t) + 10 * cos(4 * pi / 3 * (t + 3 / 8)) + min(t, 36)",
            f"min(x, {servers}) * (4 - (t - floor(t)) / 3)",
        ),
        "rewards": {"rate": [{"state": "all", "expr": "x + 1"}]},
        "initial": {"kind": "pmf", "p": mmck_stationary(45.0, 4.0, 30, 80)},
        "breakpoints": {"points": [36], "period": 1},
        "bounds": {"lambda_bar": [(91.0 if x + 1 < d else 0.0) + 4.0 * min(x, 30) for x in range(d)]},
    }


def two_state():
    return {
        "name": "two_state",
        "model": {"states": 2, "rates": [{"from": 0, "to": 1, "expr": 1}, {"from": 1, "to": 0, "expr": 1}]},
        "rewards": {"rate": [{"state": 0, "expr": 1}, {"state": 1, "expr": 0}]},
        "initial": {"kind": "point", "state": 0},
        "bounds": {"lambda_bar": [1, 1]},
        "period": 1,
    }


def periodic_two_state():
    return {
        "name": "periodic_two_state",
        "model": {
            "states": 2,
            "rates": [{"from": 0, "to": 1, "expr": "2 + sin(2 * pi * t)"}, {"from": 1, "to": 0, "expr": 3}],
        },
        "rewards": {"rate": [{"state": 0, "expr": 1}, {"state": 1, "expr": 0}]},
        "initial": {"kind": "point", "state": 0},
        "bounds": {"lambda_bar": [3, 3]},
        "period": 1,
    }


def poisson():
    return {
        "name": "poisson",
        "model": {"builtin": {"name": "poisson", "params": {"beta": 2}}},
    }


def disconnected():
    # States {0,1} and {2} never communicate; validation reports A2.
    return {
        "name": "disconnected",
        "model": {"states": 3, "rates": [{"from": 0, "to": 1, "expr": 1}, {"from": 1, "to": 0, "expr": 2}]},
        "rewards": {"rate": [{"state": "all", "expr": "x + 1"}]},
    }


def log_rate():
    # log(t) is undefined at t = 0; validation reports A3.
    return {
        "name": "log_rate",
        "model": {"states": 2, "rates": [{"from": 0, "to": 1, "expr": "log(t)"}, {"from": 1, "to": 0, "expr": 1}]},
        "rewards": {"rate": [{"state": "all", "expr": 1}]},
    }


FILES = {
    "prendiville.json": prendiville,
    "mm1k.json": mm1k,
    "multiserver.json": multiserver,
    "two_state.json": two_state,
    "periodic_two_state.json": periodic_two_state,
    "poisson.json": poisson,
    "bad_disconnected.json": disconnected,
    "bad_log_rate.json": log_rate,
}

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for name, make in FILES.items():
        (OUT / name).write_text(json.dumps(make(), indent=2) + "\n")

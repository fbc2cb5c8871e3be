#!/usr/bin/env python3
"""Regenerate the embedded parahydrogen property tables.

Requires CoolProp (ParaHydrogen, Leachman et al. Helmholtz formulation).
Reference state: normal-boiling-point saturated liquid has h = 0, s = 0
(CoolProp's default for this fluid; re-anchored below to be explicit).

Outputs (into crates/core/data/):
  parahydrogen_sat.csv     saturation curve on a log-spaced pressure grid
  parahydrogen_liquid.csv  subcooled/compressed liquid, rows of P x xi
  parahydrogen_vapor.csv   superheated vapor, rows of P x theta

The liquid and vapor tables store offsets from the saturated state at the
same pressure, so both tables meet the saturation curve exactly.
"""
import math
import os

import CoolProp.CoolProp as CP

FLUID = "ParaHydrogen"
P_MIN, P_MAX = 1.0e4, 1.0e6
N_SAT = 401
N_ROWS = 81
N_XI = 41
N_THETA = 41
T_LIQ_MIN = 14.2  # above the melting line over the whole pressure grid
T_VAP_MAX = 45.0

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data")

NBP = 101325.0
H0 = CP.PropsSI("H", "P", NBP, "Q", 0, FLUID)
S0 = CP.PropsSI("S", "P", NBP, "Q", 0, FLUID)


def props(key, *args):
    v = CP.PropsSI(key, *args, FLUID)
    if key == "H":
        v -= H0
    if key == "S":
        v -= S0
    return v


def log_grid(n):
    a, b = math.log(P_MIN), math.log(P_MAX)
    g = [math.exp(a + (b - a) * i / (n - 1)) for i in range(n)]
    g[0], g[-1] = P_MIN, P_MAX
    return g


def sat(p):
    out = {"p": p, "t": props("T", "P", p, "Q", 0)}
    for ph, q in (("l", 0), ("v", 1)):
        out["rho_" + ph] = props("D", "P", p, "Q", q)
        out["h_" + ph] = props("H", "P", p, "Q", q)
        out["s_" + ph] = props("S", "P", p, "Q", q)
        out["mu_" + ph] = props("V", "P", p, "Q", q)
    return out


def write_sat():
    cols = ["p", "t", "rho_l", "rho_v", "h_l", "h_v", "s_l", "s_v", "mu_l", "mu_v"]
    with open(os.path.join(OUT, "parahydrogen_sat.csv"), "w") as f:
        f.write(",".join(cols) + "\n")
        for p in log_grid(N_SAT):
            s = sat(p)
            f.write(",".join(repr(float(s[c])) for c in cols) + "\n")


def write_liquid():
    # xi in [0,1] spans h from h(P, T_LIQ_MIN) up to saturated liquid h(P).
    cols = ["p", "h_lo", "xi", "d_t", "d_rho", "d_s", "d_mu"]
    with open(os.path.join(OUT, "parahydrogen_liquid.csv"), "w") as f:
        f.write(",".join(cols) + "\n")
        for p in log_grid(N_ROWS):
            s = sat(p)
            h_lo = props("H", "P", p, "T", T_LIQ_MIN)
            for j in range(N_XI):
                xi = j / (N_XI - 1)
                if j == N_XI - 1:
                    row = [p, h_lo, xi, 0.0, 0.0, 0.0, 0.0]
                else:
                    h = h_lo + xi * (s["h_l"] - h_lo)
                    t = props("T", "P", p, "H", h)
                    rho = props("D", "P", p, "H", h)
                    ent = props("S", "P", p, "H", h)
                    mu = props("V", "P", p, "H", h)
                    row = [p, h_lo, xi, t - s["t"], rho - s["rho_l"], ent - s["s_l"], mu - s["mu_l"]]
                f.write(",".join(repr(float(v)) for v in row) + "\n")


def write_vapor():
    # theta in [0,1] spans T from T_sat(P) to T_VAP_MAX, quadratically clustered
    # near saturation.
    cols = ["p", "theta", "d_t", "rho", "d_h", "d_s", "mu"]
    with open(os.path.join(OUT, "parahydrogen_vapor.csv"), "w") as f:
        f.write(",".join(cols) + "\n")
        for p in log_grid(N_ROWS):
            s = sat(p)
            for j in range(N_THETA):
                theta = (j / (N_THETA - 1)) ** 2
                d_t = theta * (T_VAP_MAX - s["t"])
                if j == 0:
                    row = [p, theta, 0.0, s["rho_v"], 0.0, 0.0, s["mu_v"]]
                else:
                    t = s["t"] + d_t
                    row = [
                        p,
                        theta,
                        d_t,
                        props("D", "P", p, "T", t),
                        props("H", "P", p, "T", t) - s["h_v"],
                        props("S", "P", p, "T", t) - s["s_v"],
                        props("V", "P", p, "T", t),
                    ]
                f.write(",".join(repr(float(v)) for v in row) + "\n")


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    write_sat()
    write_liquid()
    write_vapor()

#!/usr/bin/env python3
"""Fit single-diode reference parameters for the CS6P-250P module.

Offline helper. The modified ideality factor is fixed from an assumed diode
ideality of 1.3 over 60 series cells at 25 C. Iph and Is follow linearly from
the short-circuit and open-circuit datasheet points for a given (Rs, Rsh);
(Rs, Rsh) are then chosen so the explicit Lambert-W MPP expressions return the
datasheet MPP (30.1 V, 8.30 A) exactly.

The printed numbers are the defaults compiled into core/src/defaults.cpp.
"""
import math

from scipy.optimize import fsolve
from scipy.special import lambertw

V_MP, I_MP, V_OC, I_SC = 30.1, 8.30, 37.2, 8.87
CELLS = 60
IDEALITY = 1.30
K_OVER_Q = 1.380649e-23 / 1.602176634e-19
T_REF = 298.15
A_REF = IDEALITY * CELLS * K_OVER_Q * T_REF


def currents_from_endpoints(rs, rsh):
    e_sc = math.expm1(I_SC * rs / A_REF)
    e_oc = math.expm1(V_OC / A_REF)
    rhs_sc = I_SC + I_SC * rs / rsh
    rhs_oc = V_OC / rsh
    i_s = (rhs_sc - rhs_oc) / (e_oc - e_sc)
    return rhs_sc + i_s * e_sc, i_s


def explicit_mpp(rs, rsh, iph, i_s):
    w = lambertw(iph * math.e / i_s).real
    v = (1.0 + rs / rsh) * A_REF * (w - 1.0) - rs * iph * (1.0 - 1.0 / w)
    i = iph * (1.0 - 1.0 / w) - A_REF * (w - 1.0) / rsh
    return v, i


def residuals(x):
    rs, log_rsh = x
    rsh = math.exp(log_rsh)
    iph, i_s = currents_from_endpoints(rs, rsh)
    v, i = explicit_mpp(rs, rsh, iph, i_s)
    return [v - V_MP, i - I_MP]


if __name__ == "__main__":
    sol, _, ier, msg = fsolve(residuals, [0.2, math.log(400.0)], full_output=True, xtol=1e-15)
    if ier != 1:
        raise SystemExit(f"fit failed: {msg}")
    rs, rsh = sol[0], math.exp(sol[1])
    iph, i_s = currents_from_endpoints(rs, rsh)
    print(f"a   = {A_REF!r}")
    print(f"Rs  = {rs!r}")
    print(f"Rsh = {rsh!r}")
    print(f"Iph = {iph!r}")
    print(f"Is  = {i_s!r}")
    print(f"MPP = {explicit_mpp(rs, rsh, iph, i_s)}")

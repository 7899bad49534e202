"""Root-number-refined Hecke traces and a_p bias statistics for elliptic curves."""

from .arith import divisors, factor, kronecker, mobius_omega_phi, sigma1
from .bias import WEIGHTS, BiasSeries, StratumKey, WeightFunction, ec_bias_series, emit_dat
from .classno import h_weighted, hurwitz, reduced_forms
from .curves import CurveRecord, WeierstrassCurve, ap, batch_ap, parse_dataset
from .traces import (TraceQuery, dim_new_signed, mf_bias_series, trace_new_Tn,
                     trace_new_TnWN, trace_signed)

__version__ = "0.1.0"

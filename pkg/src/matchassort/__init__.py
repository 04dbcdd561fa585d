"""Assortment optimization for two-sided sequential matching markets."""

from .choice import (MnlModel, PopularModel, TabularModel, UniformModel, is_easy_to_match,
                     is_regular, is_submodular_demand, mixture_of_mnl)
from .core import AssortmentFamily, EvalResult, FractionalAssortment, Instance, validate
from .evaluate import (brute_force_opt, evaluate, expected_revenue_exact, sandwich, simulate,
                       welfare_upper_bound)

__all__ = [
    "AssortmentFamily", "EvalResult", "FractionalAssortment", "Instance", "MnlModel",
    "PopularModel", "TabularModel", "UniformModel", "brute_force_opt", "evaluate",
    "expected_revenue_exact", "is_easy_to_match", "is_regular", "is_submodular_demand",
    "mixture_of_mnl", "sandwich", "simulate", "validate", "welfare_upper_bound",
]

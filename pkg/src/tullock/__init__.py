"""Tullock contests for crowdsourcing under incomplete information.

Solves the optimal prize-function mechanism, optimizes the fixed-prize
benchmark, and verifies equilibria by Monte-Carlo best-response tests.
"""
from .core import (ContestConfig, CostDistribution, EffortTechnology, PrizeSchedule,
                   csf_win_prob, ex_post_payoff, power_technology, uniform, virtual_cost)
from .errors import (ConvergenceError, DomainError, IntegrationError, NumericalError,
                     RootBracketError, TullockError, ValidationError)
from .kernels import BACKEND

__version__ = "0.1.0"

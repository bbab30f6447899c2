"""Nonlinear geometric acoustics of a van der Waals gas in a stratified atmosphere."""

from ._strata import *  # noqa: F401,F403
from ._strata import DomainError, NumericalError  # noqa: F401

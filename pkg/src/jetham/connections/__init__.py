"""Nonlinear and N-linear connections on the dual 1-jet bundle."""

from .nlinear import *  # noqa: F401,F403
from .nlinear import __all__ as _nl_all
from .nonlinear import *  # noqa: F401,F403
from .nonlinear import __all__ as _nlc_all

__all__ = list(_nlc_all) + list(_nl_all)

"""Tolerance bundle shared by all modules.

All tolerances are relative to a matrix norm chosen at the point of use.
Environment variables ``PHREALIZE_RANK_TOL``, ``PHREALIZE_PSD_TOL`` and
``PHREALIZE_AXIS_TOL`` override the defaults in :func:`from_env`.
"""

import os
from dataclasses import dataclass, asdict, replace

from .errors import InputError

__all__ = ["Tolerances", "DEFAULT", "from_env"]


@dataclass(frozen=True)
class Tolerances:
    tol_sym: float = 1e-12
    tol_psd: float = 1e-8
    tol_orth: float = 1e-12
    axis_tol: float = 1e-8
    rank_tol: float = 1e-9
    # eigenvalues closer than cluster_tol*||A|| are treated as one cluster
    cluster_tol: float = 1e-5

    def as_dict(self):
        return asdict(self)

    def replace(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


DEFAULT = Tolerances()

_ENV = {
    "rank_tol": "PHREALIZE_RANK_TOL",
    "tol_psd": "PHREALIZE_PSD_TOL",
    "axis_tol": "PHREALIZE_AXIS_TOL",
}


def from_env(base=DEFAULT, environ=None):
    """Return ``base`` with any environment overrides applied."""
    environ = os.environ if environ is None else environ
    kw = {}
    for field, var in _ENV.items():
        if var in environ:
            try:
                kw[field] = float(environ[var])
            except ValueError as exc:
                raise InputError(f"{var} is not a number: {environ[var]!r}") from exc
    return base.replace(**kw)

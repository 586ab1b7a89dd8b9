"""Numerical laboratory for front delays in Fisher-KPP equations with
non-local (algebraic-tail) competition and their local Gompertz-type proxies.
"""

__version__ = "0.1.0"

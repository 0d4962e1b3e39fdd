"""Acute-angle point sets in vector spaces over finite fields of odd order."""

from .charsums import (
    chi_rhs,
    chi_sum,
    gauss_sum,
    lemma1_rhs,
    orthogonality_check,
    psi_eval,
    r_value,
    s_sum,
    sum_report,
    t_count,
    t_identity,
    w_count,
)
from .field import GF, Elem, QRClass, arith, make_field, qr_class, trace
from .geometry import (
    Point,
    PointSet,
    delta_dot,
    delta_sum,
    inner,
    set_is_acute,
    triple_is_acute,
    vertex_class,
)
from .search import bound_table, greedy_lower, grid_construct, max_acute_exact, qr_run

__version__ = "0.1.0"

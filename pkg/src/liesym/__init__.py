"""Lie point-symmetry toolkit for a fifth-order (3+1)-dimensional KdV-type equation."""

from .expr import (
    Add, CyclicBindingError, EvalDomainError, Expr, ExprError, Fun, Jet, Mul,
    Pow, Rat, ResourceLimitError, Sym, Ufunc, add, differentiate, fun, jet,
    mul, pow_, rat, substitute, symbol, to_text, ufunc,
)
from .normal import NF, as_expr, canonical, equivalent, is_zero, normalize, set_expansion_limit
from .parse import ParseContext, ParseError, parse
from .numeric import eval_numeric, random_equiv
from .jets import (
    PDE, VectorField, load_pde, prolongation_coefficient, restrict_on_shell,
    symmetry_condition, total_derivative,
)
from .detsys import (
    DeterminingSystem, PolyAnsatz, SymmetryBasis, check_membership,
    extract_determining, solve_poly_ansatz,
)
from .liealg import commutator_table, jacobi_check, lie_bracket, reference_basis
from .flows import exponentiate, transform_solution, verify_group_action
from .verify import check_reduction, ode_residual, residual, verify_catalog
from .weierstrass import weierstrass_p, weierstrass_zeta

__all__ = [name for name in dir() if not name.startswith("_")]

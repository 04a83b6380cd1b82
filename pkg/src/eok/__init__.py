"""Random epsilon-1-in-k SAT: instances, exact solutions, solution-space geometry and bounds."""
from eok.errors import DomainError, EnumerationTimeout, FormulaParseError, InvariantViolation
from eok.formula import (Assignment, Clause, Formula, ModelParams, gen_constant_prob, gen_counting, generate,
                         parse_formula, threshold_p, threshold_r, write_formula)
from eok.solver import SolutionSet, check_assignment, enumerate_solutions, is_satisfiable

__version__ = "0.1.0"

__all__ = [
    "DomainError", "EnumerationTimeout", "FormulaParseError", "InvariantViolation",
    "Assignment", "Clause", "Formula", "ModelParams", "gen_constant_prob", "gen_counting", "generate",
    "parse_formula", "threshold_p", "threshold_r", "write_formula",
    "SolutionSet", "check_assignment", "enumerate_solutions", "is_satisfiable",
]

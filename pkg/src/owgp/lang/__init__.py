from .ast import (
    KRD,
    And,
    BBool,
    BCont,
    BContents,
    Const,
    Den,
    Exists,
    ExistsInRegion,
    GoalFormula,
    Lambda,
    Or,
    Rel,
    Skolem,
    Var,
    alpha_rename,
    bind_terms,
    free_vars,
    substitute,
)
from .evaluate import (
    EvaluationError,
    UnsupportedExpression,
    den_prob,
    eval_expr,
    fluent_prob,
    holds,
    krd,
    props_for,
)
from .parser import (
    DefiniteDescriptionError,
    GoalSyntaxError,
    UnboundVariableError,
    UnknownRelationError,
    expr_text,
    fluent_text,
    goal_text,
    parse_expr,
    parse_goal,
)

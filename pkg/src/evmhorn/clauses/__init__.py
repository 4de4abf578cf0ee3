from .consteval import ArrV, ConsV, EvalError, NotConst, eval_const, value_to_expr  # noqa: F401
from .constfold import fold_constants, simplify  # noqa: F401
from .encode import EncodingError, encode_values  # noqa: F401
from .instantiate import InstantiationError, instantiate  # noqa: F401
from .ir import ClauseSet, GroundClause, Query, SlotGroup, mangle  # noqa: F401
from .selectors import SelectorTable, SignatureMismatch  # noqa: F401
from .unfold import fold_exhaustive, fold_linear, unfold_predicate  # noqa: F401

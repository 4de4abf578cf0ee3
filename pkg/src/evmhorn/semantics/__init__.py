from .values import (  # noqa: F401
    TOP,
    AbsMap,
    AbsWord,
    Top,
    abs_binop,
    abs_check,
    abs_unop,
    access_word,
    concat,
    extract,
    leq_map,
    leq_word,
    stack_to_array,
    store_word,
    to_word_memory,
)
from .alpha import AbsFact, alpha_exception, alpha_halt, alpha_running, leq_fact  # noqa: F401

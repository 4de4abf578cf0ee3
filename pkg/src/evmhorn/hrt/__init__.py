from .ast import *  # noqa: F401,F403
from .lexer import HrtParseError, LexError, tokenize  # noqa: F401
from .parser import ParseError, parse_module  # noqa: F401
from .typecheck import HrtTypeError, typecheck_module  # noqa: F401
from .pretty import pretty_module  # noqa: F401

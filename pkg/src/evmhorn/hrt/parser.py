"""Recursive-descent parser for the specification language."""
from __future__ import annotations

from ..opcodes import BY_NAME
from . import ast
from .lexer import HrtParseError, Token, tokenize

# Bare uppercase identifiers usable as integer constants in specifications:
# the word-size bound and the EVM mnemonics (handy as selector arguments).
CONSTANTS: dict[str, int] = {"MAX": 1 << 256}
CONSTANTS.update({name: info.value for name, info in BY_NAME.items()})


class ParseError(HrtParseError):
    def __init__(self, message: str, token: Token | None = None):
        if token is not None:
            message = f"line {token.line}: {message} (got {token.text!r})"
        super().__init__(message)


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers -----------------------------------------------------
    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            raise ParseError(f"expected {text or kind}", self.peek())
        return self.next()

    def accept(self, kind: str, text: str | None = None) -> bool:
        if self.at(kind, text):
            self.next()
            return True
        return False

    # -- module ------------------------------------------------------------
    def parse_module(self) -> ast.Module:
        mod = ast.Module()
        while not self.at("eof"):
            tok = self.peek()
            if self.at("kw", "datatype"):
                dt = self.parse_datatype()
                mod.datatypes[dt.name] = dt
            elif self.at("kw", "pred"):
                pd = self.parse_pred()
                mod.preds[pd.name] = pd
            elif self.at("kw", "op"):
                op = self.parse_op()
                mod.ops[op.name] = op
            elif self.at("kw", "sel"):
                sd = self.parse_sel()
                mod.sels[sd.name] = sd
            elif self.at("kw", "rule"):
                mod.rules.append(self.parse_rule())
            elif self.at("kw", "query"):
                mod.queries.append(self.parse_query())
            elif self.at("kw", "test"):
                mod.tests.append(self.parse_test())
            else:
                raise ParseError("expected a declaration", tok)
        return mod

    # -- types ---------------------------------------------------------
    def parse_type(self) -> object:
        tok = self.peek()
        if self.accept("kw", "int"):
            return ast.INT
        if self.accept("kw", "bool"):
            return ast.BOOL
        if self.accept("kw", "unit"):
            return ast.UNIT
        if self.accept("kw", "array"):
            self.expect("sym", "<")
            elem = self.parse_type()
            self.expect("sym", ">")
            return ast.TArray(elem)
        if tok.kind == "ident":
            self.next()
            return ast.TSum(tok.text)
        raise ParseError("expected a type", tok)

    def parse_type_product(self) -> tuple:
        types = [self.parse_type()]
        while self.accept("sym", "*"):
            types.append(self.parse_type())
        return tuple(types)

    # -- declarations --------------------------------------------------
    def parse_datatype(self) -> ast.Datatype:
        self.expect("kw", "datatype")
        name = self.expect("ident").text
        if not (self.accept("sym", ":=") or self.accept("sym", "=")):
            raise ParseError("expected ':=' or '=' in datatype", self.peek())
        ctors = [self.parse_constructor_decl()]
        while self.accept("sym", "|"):
            ctors.append(self.parse_constructor_decl())
        self.expect("sym", ";")
        return ast.Datatype(name, tuple(ctors))

    def parse_constructor_decl(self) -> tuple:
        cname = self.expect("cons").text
        payload: tuple = ()
        if self.accept("sym", "<"):
            payload = self.parse_type_product()
            self.expect("sym", ">")
        return (cname, payload)

    def parse_pred(self) -> ast.PredDecl:
        self.expect("kw", "pred")
        name = self.expect("ident").text
        params: tuple = ()
        if self.accept("sym", "{"):
            if not self.at("sym", "}"):
                params = self.parse_type_product()
            self.expect("sym", "}")
        self.expect("sym", ":")
        args = self.parse_type_product()
        self.expect("sym", ";")
        return ast.PredDecl(name, params, args)

    def parse_op(self) -> ast.OpDef:
        self.expect("kw", "op")
        name = self.expect("ident").text
        cparams: list = []
        if self.accept("sym", "{"):
            while not self.at("sym", "}"):
                pname = self.expect("pvar").text
                self.expect("sym", ":")
                cparams.append((pname, self.parse_type()))
                if not self.at("sym", "}"):
                    self.expect("sym", ",")
            self.expect("sym", "}")
        self.expect("sym", "(")
        params: list = []
        while not self.at("sym", ")"):
            pname = self.expect("ident").text
            self.expect("sym", ":")
            params.append((pname, self.parse_type()))
            if not self.at("sym", ")"):
                self.expect("sym", ",")
        self.expect("sym", ")")
        self.expect("sym", ":")
        ret = self.parse_type()
        self.expect("sym", ":=")
        body = self.parse_expr()
        self.expect("sym", ";")
        return ast.OpDef(name, tuple(cparams), tuple(params), ret, body)

    def parse_sel(self) -> ast.SelDecl:
        self.expect("kw", "sel")
        name = self.expect("ident").text
        self.expect("sym", ":")
        if self.accept("kw", "unit"):
            dom: tuple = ()
        else:
            dom = self.parse_type_product()
        self.expect("sym", "->")
        self.expect("sym", "[")
        cod = self.parse_type_product()
        self.expect("sym", "]")
        self.expect("sym", ";")
        return ast.SelDecl(name, dom, cod)

    # -- rules / queries / tests ----------------------------------------
    def parse_quants(self) -> tuple:
        quants: list = []
        if self.accept("kw", "for"):
            quants.append(self.parse_quant())
            while self.at("sym", ",") and self.at("sym", "(", ahead=1):
                self.next()
                quants.append(self.parse_quant())
        return tuple(quants)

    def parse_quant(self) -> ast.Quant:
        self.expect("sym", "(")
        binders: list = []
        while True:
            bname = self.expect("pvar").text
            self.expect("sym", ":")
            binders.append((bname, self.parse_type()))
            if not self.accept("sym", ","):
                break
        self.expect("sym", ")")
        self.expect("kw", "in")
        sel = self.expect("ident").text
        self.expect("sym", "(")
        args: list = []
        while not self.at("sym", ")"):
            args.append(self.parse_expr())
            if not self.at("sym", ")"):
                self.expect("sym", ",")
        self.expect("sym", ")")
        return ast.Quant(tuple(binders), sel, tuple(args))

    def parse_rule(self) -> ast.RuleDef:
        self.expect("kw", "rule")
        name = self.expect("ident").text
        self.expect("sym", ":=")
        quants = self.parse_quants()
        macros: list = []
        if self.accept("kw", "let"):
            while self.accept("kw", "macro"):
                mname = self.expect("mref").text
                self.expect("sym", ":=")
                premises = self.parse_premises(stop={("kw", "in"), ("kw", "macro")})
                macros.append((mname, premises))
            self.expect("kw", "in")
        clauses = [self.parse_clause()]
        while self.at("sym", ",") and self.at("kw", "clause", ahead=1):
            self.next()
            clauses.append(self.parse_clause())
        self.expect("sym", ";")
        return ast.RuleDef(name, quants, tuple(macros), tuple(clauses))

    def parse_var_block(self) -> tuple:
        variables: list = []
        if self.accept("sym", "["):
            while not self.at("sym", "]"):
                vname = self.expect("qvar").text
                self.expect("sym", ":")
                variables.append((vname, self.parse_type()))
                if not self.at("sym", "]"):
                    self.expect("sym", ",")
            self.expect("sym", "]")
        return tuple(variables)

    def parse_clause(self) -> ast.ClauseDef:
        self.expect("kw", "clause")
        variables = self.parse_var_block()
        premises = self.parse_premises(stop={("sym", "=>")})
        self.expect("sym", "=>")
        conclusion = self.parse_expr()
        return ast.ClauseDef(variables, premises, conclusion)

    def parse_premises(self, stop: set) -> tuple:
        """Premise list; stops before ``stop`` tokens, ';', or a ',' that
        introduces the next clause."""
        premises: list = []
        while True:
            if self.at("mref"):
                premises.append(ast.MacroRef(self.next().text))
            else:
                premises.append(self.parse_expr())
            if self.at("sym", ",") and not self.at("kw", "clause", ahead=1):
                nxt = self.peek(1)
                if ("kw", nxt.text) in stop or ("sym", nxt.text) in stop:
                    break
                self.next()
                continue
            break
        return tuple(premises)

    def parse_query(self) -> ast.QueryDef:
        self.expect("kw", "query")
        name = self.expect("ident").text
        quants = self.parse_quants()
        variables = self.parse_var_block()
        premises = self.parse_premises(stop=set())
        self.expect("sym", ";")
        return ast.QueryDef(name, quants, variables, premises)

    def parse_test(self) -> ast.TestDef:
        self.expect("kw", "test")
        name = self.expect("ident").text
        self.expect("kw", "expect")
        if self.accept("kw", "SAT"):
            expect = "SAT"
        else:
            self.expect("kw", "UNSAT")
            expect = "UNSAT"
        quants = self.parse_quants()
        variables = self.parse_var_block()
        premises = self.parse_premises(stop=set())
        self.expect("sym", ";")
        return ast.TestDef(name, expect, quants, variables, premises)

    # -- expressions -----------------------------------------------------
    def parse_expr(self) -> object:
        return self.parse_or()

    def parse_or(self) -> object:
        left = self.parse_and()
        while self.accept("sym", "||"):
            left = ast.BinExpr("||", left, self.parse_and())
        return left

    def parse_and(self) -> object:
        left = self.parse_cmp()
        while self.accept("sym", "&&"):
            left = ast.BinExpr("&&", left, self.parse_cmp())
        return left

    _CMP = ("=", "!=", "<", ">", "<=", ">=")

    def parse_cmp(self) -> object:
        left = self.parse_ternary()
        tok = self.peek()
        if tok.kind == "sym" and tok.text in self._CMP:
            self.next()
            return ast.BinExpr(tok.text, left, self.parse_ternary())
        return left

    def parse_ternary(self) -> object:
        # "(c) ? (t) : (e)" — the condition is written parenthesized, so the
        # conditional slots between comparison and additive precedence.
        cond = self.parse_add()
        if self.accept("sym", "?"):
            then = self.parse_ternary()
            self.expect("sym", ":")
            els = self.parse_ternary()
            return ast.Ite(cond, then, els)
        return cond

    def parse_add(self) -> object:
        left = self.parse_mul()
        while self.at("sym", "+") or self.at("sym", "-"):
            op = self.next().text
            left = ast.BinExpr(op, left, self.parse_mul())
        return left

    def parse_mul(self) -> object:
        left = self.parse_unary()
        while self.at("sym", "*") or self.at("kw", "mod") or self.at("kw", "div"):
            op = self.next().text
            left = ast.BinExpr(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> object:
        if self.accept("sym", "~"):
            operand = self.parse_unary()
            if isinstance(operand, ast.Num):
                return ast.Num(-operand.value)
            return ast.Tilde(operand)
        return self.parse_atom()

    def parse_atom(self, allow_call: bool = True) -> object:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return ast.Num(int(tok.text, 0))
        if tok.kind in ("qvar", "pvar"):
            self.next()
            return ast.Var(tok.text)
        if self.accept("kw", "true"):
            return ast.BoolLit(True)
        if self.accept("kw", "false"):
            return ast.BoolLit(False)
        if tok.kind == "cons":
            self.next()
            args: list = []
            if self.accept("sym", "("):
                while not self.at("sym", ")"):
                    args.append(self.parse_expr())
                    if not self.at("sym", ")"):
                        self.expect("sym", ",")
                self.expect("sym", ")")
            return ast.Cons(tok.text, tuple(args))
        if tok.kind == "ident":
            return self.parse_ident_expr(allow_call)
        if self.accept("sym", "("):
            items = [self.parse_expr()]
            while self.accept("sym", ","):
                items.append(self.parse_expr())
            self.expect("sym", ")")
            return items[0] if len(items) == 1 else ast.Tuple_(tuple(items))
        if self.accept("sym", "["):
            elem = self.parse_expr()
            self.expect("sym", "]")
            return ast.ConstArr(elem)
        if self.accept("kw", "select"):
            # Operand atoms are juxtaposed, so a variable followed by a
            # parenthesized operand must not be read as an application.
            return ast.Select(self.parse_atom(False), self.parse_atom(False))
        if self.accept("kw", "store"):
            return ast.StoreExpr(
                self.parse_atom(False), self.parse_atom(False), self.parse_atom(False)
            )
        if self.at("kw", "match"):
            return self.parse_match()
        if self.at("kw", "for"):
            return self.parse_sum()
        raise ParseError("expected an expression", tok)

    def parse_ident_expr(self, allow_call: bool = True) -> object:
        name = self.expect("ident").text
        if allow_call and self.at("sym", "{"):
            self.next()
            cargs: list = []
            while not self.at("sym", "}"):
                cargs.append(self.parse_expr())
                if not self.at("sym", "}"):
                    self.expect("sym", ",")
            self.expect("sym", "}")
            self.expect("sym", "(")
            args = []
            while not self.at("sym", ")"):
                args.append(self.parse_expr())
                if not self.at("sym", ")"):
                    self.expect("sym", ",")
            self.expect("sym", ")")
            return ast.Apply(name, tuple(cargs), tuple(args))
        if allow_call and self.at("sym", "("):
            self.next()
            args = []
            while not self.at("sym", ")"):
                args.append(self.parse_expr())
                if not self.at("sym", ")"):
                    self.expect("sym", ",")
            self.expect("sym", ")")
            return ast.Apply(name, (), tuple(args))
        if name in CONSTANTS:
            return ast.Num(CONSTANTS[name])
        return ast.Var(name)

    def parse_match(self) -> object:
        self.expect("kw", "match")
        scrut = self.parse_expr()
        scrutinees = scrut.items if isinstance(scrut, ast.Tuple_) else (scrut,)
        self.expect("kw", "with")
        arms: list = []
        while self.accept("sym", "|"):
            patterns = self.parse_arm_patterns(len(scrutinees))
            self.expect("sym", "=>")
            body = self.parse_expr()
            arms.append(ast.Arm(patterns, body))
        if not arms:
            raise ParseError("match requires at least one arm", self.peek())
        return ast.Match(tuple(scrutinees), tuple(arms))

    def parse_arm_patterns(self, arity: int) -> tuple | None:
        if self.accept("sym", "_"):
            return None
        if self.accept("sym", "("):
            pats = [self.parse_pattern()]
            while self.accept("sym", ","):
                pats.append(self.parse_pattern())
            self.expect("sym", ")")
            return tuple(pats)
        return (self.parse_pattern(),)

    def parse_pattern(self) -> object:
        if self.accept("sym", "_"):
            return ast.PAny()
        if self.at("num") or self.at("hex"):
            tok = self.next()
            return ast.PLit(int(tok.text, 0))
        if self.accept("sym", "~"):
            tok = self.expect("num")
            return ast.PLit(-int(tok.text, 0))
        if self.at("kw", "true") or self.at("kw", "false"):
            return ast.PLit(self.next().text == "true")
        tok = self.expect("cons")
        binders: list = []
        if self.accept("sym", "("):
            while not self.at("sym", ")"):
                if self.accept("sym", "_"):
                    binders.append(None)
                else:
                    binders.append(self.expect("ident").text)
                if not self.at("sym", ")"):
                    self.expect("sym", ",")
            self.expect("sym", ")")
        return ast.PCons(tok.text, tuple(binders))

    def parse_sum(self) -> object:
        self.expect("kw", "for")
        self.expect("sym", "(")
        binders: list = []
        while True:
            bname = self.expect("pvar").text
            self.expect("sym", ":")
            binders.append((bname, self.parse_type()))
            if not self.accept("sym", ","):
                break
        self.expect("sym", ")")
        self.expect("kw", "in")
        sel = self.expect("ident").text
        self.expect("sym", "(")
        sel_args: list = []
        while not self.at("sym", ")"):
            sel_args.append(self.parse_expr())
            if not self.at("sym", ")"):
                self.expect("sym", ",")
        self.expect("sym", ")")
        self.expect("sym", ":")
        tok = self.peek()
        if tok.kind == "sym" and tok.text in ("&&", "||", "+", "*"):
            self.next()
            step = self.parse_expr()
            return ast.SumExpr(tuple(binders), sel, tuple(sel_args), tok.text, None, step, None)
        accum_name = self.expect("ident").text
        self.expect("sym", ":")
        accum_type = self.parse_type()
        self.expect("sym", "->")
        step = self.parse_expr()
        self.expect("sym", ",")
        seed = self.parse_expr()
        return ast.SumExpr(
            tuple(binders), sel, tuple(sel_args), "fold", (accum_name, accum_type), step, seed
        )


def parse_module(text: str) -> ast.Module:
    return Parser(text).parse_module()

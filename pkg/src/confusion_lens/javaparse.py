"""Minimal recursive-descent Java parser producing span-annotated ASTs.

Covers the statement/expression subset that snippet corpora of confusing
code exercise: declarations, control flow, operator expressions, casts,
calls, literals. Not a full Java grammar; unparseable input raises
:class:`ParseError` with the failing position.

Node kinds follow common grammar naming ("if_statement",
"binary_expression", "update_expression", "decimal_integer_literal", ...)
so the category mapping table reads naturally. Operator and separator
terminals appear as nodes of kind "operator", "separator", and "bracket"
so a region covering only punctuation resolves to a punctuation node.
"""

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseError

PRIMITIVE_TYPES = {
    "byte": "integral_type",
    "short": "integral_type",
    "int": "integral_type",
    "long": "integral_type",
    "char": "integral_type",
    "float": "floating_point_type",
    "double": "floating_point_type",
    "boolean": "boolean_type",
    "void": "void_type",
}

MODIFIERS = {
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "volatile", "transient", "native", "strictfp",
}

KEYWORDS = set(PRIMITIVE_TYPES) | MODIFIERS | {
    "if", "else", "while", "do", "for", "return", "break", "continue",
    "class", "interface", "enum", "new", "instanceof", "this", "super",
    "true", "false", "null", "switch", "case", "default", "throw", "throws",
    "try", "catch", "finally", "import", "package", "extends", "implements",
    "assert", "var",
}

ASSIGNMENT_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}

# binary operator precedence, higher binds tighter
BINARY_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6, "!=": 6,
    "<": 7, ">": 7, "<=": 7, ">=": 7, "instanceof": 7,
    "<<": 8, ">>": 8, ">>>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<number>0[bB][01_]+[lL]?|0[xX][0-9a-fA-F_]+[lL]?
      |\d[\d_]*\.\d[\d_]*(?:[eE][+-]?\d+)?[fFdD]?
      |\.\d[\d_]*(?:[eE][+-]?\d+)?[fFdD]?
      |\d[\d_]*(?:[eE][+-]?\d+)[fFdD]?
      |\d[\d_]*[fFdDlL]?)
  | (?P<string>"(?:\\.|[^"\\])*")
  | (?P<char>'(?:\\.|[^'\\])')
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>>>>=|>>>|<<=|>>=|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||->|::
      |[+\-*/%&|^]=
      |[+\-*/%=!<>&|^~?])
  | (?P<sep>[;,.:@])
  | (?P<bracket>[()\[\]{}])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str  # number | string | char | ident | keyword | op | sep | bracket
    text: str
    start: int
    end: int


def lex(source: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and text in KEYWORDS:
                kind = "keyword"
            tokens.append(Token(kind, text, m.start(), m.end()))
        pos = m.end()
    return tokens


@dataclass
class Node:
    kind: str
    start: int
    end: int
    children: list = field(default_factory=list)
    parent: Optional["Node"] = None

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def depth(self) -> int:
        d = 0
        node = self
        while node.parent is not None:
            d += 1
            node = node.parent
        return d


def _leaf(token: Token, kind: str) -> Node:
    return Node(kind=kind, start=token.start, end=token.end)


def _literal_kind(text: str) -> str:
    if text.startswith(("0b", "0B")):
        return "binary_integer_literal"
    if text.startswith(("0x", "0X")):
        return "hex_integer_literal"
    if "." in text or "e" in text or "E" in text or text[-1] in "fFdD":
        return "decimal_floating_point_literal"
    if len(text) > 1 and text[0] == "0" and text[1].isdigit():
        return "octal_integer_literal"
    return "decimal_integer_literal"


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = lex(source)
        self.pos = 0

    # --- token plumbing -------------------------------------------------

    def _peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def _at(self, text: str, offset: int = 0) -> bool:
        tok = self._peek(offset)
        return tok is not None and tok.text == text

    def _advance(self) -> Token:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.source))
        self.pos += 1
        return tok

    def _expect(self, text: str) -> Token:
        tok = self._peek()
        if tok is None or tok.text != text:
            where = tok.start if tok else len(self.source)
            got = tok.text if tok else "end of input"
            raise ParseError(f"expected {text!r}, got {got!r}", where)
        return self._advance()

    def _terminal(self, tok: Token) -> Node:
        if tok.kind == "sep":
            return _leaf(tok, "separator")
        if tok.kind == "bracket":
            return _leaf(tok, "bracket")
        if tok.kind in ("op",):
            return _leaf(tok, "operator")
        if tok.kind == "keyword":
            return _leaf(tok, "keyword")
        return _leaf(tok, tok.kind)

    def _node(self, kind: str, children: list[Node]) -> Node:
        if not children:
            raise ParseError(f"empty node {kind}", self._peek().start if self._peek() else 0)
        return Node(
            kind=kind,
            start=children[0].start,
            end=children[-1].end,
            children=children,
        )

    # --- entry point ----------------------------------------------------

    def parse_program(self) -> Node:
        children = []
        while self._peek() is not None:
            children.append(self._statement())
        if not children:
            raise ParseError("empty program", 0)
        root = self._node("program", children)
        # the root spans the whole source, including surrounding whitespace
        root.start = 0
        root.end = len(self.source)
        _set_parents(root)
        return root

    # --- statements -----------------------------------------------------

    def _statement(self) -> Node:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.source))
        text = tok.text
        if text == "{":
            return self._block()
        if text == "if":
            return self._if_statement()
        if text == "while":
            return self._while_statement()
        if text == "do":
            return self._do_statement()
        if text == "for":
            return self._for_statement()
        if text in ("return", "throw"):
            return self._return_statement(text)
        if text in ("break", "continue"):
            kids = [self._terminal(self._advance())]
            if self._at(";"):
                kids.append(self._terminal(self._advance()))
            return self._node(f"{text}_statement", kids)
        if text == ";":
            return self._terminal(self._advance())
        if text in MODIFIERS or text == "class":
            return self._declaration_with_modifiers()
        if self._looks_like_declaration():
            return self._local_declaration_or_method()
        return self._expression_statement()

    def _block(self) -> Node:
        kids = [self._terminal(self._expect("{"))]
        while not self._at("}"):
            if self._peek() is None:
                raise ParseError("unterminated block", len(self.source))
            kids.append(self._statement())
        kids.append(self._terminal(self._expect("}")))
        return self._node("block", kids)

    def _paren_condition(self) -> list[Node]:
        kids = [self._terminal(self._expect("("))]
        kids.append(self._expression())
        kids.append(self._terminal(self._expect(")")))
        return kids

    def _if_statement(self) -> Node:
        kids = [self._terminal(self._expect("if"))]
        kids.extend(self._paren_condition())
        kids.append(self._statement())
        if self._at("else"):
            kids.append(self._terminal(self._advance()))
            kids.append(self._statement())
        return self._node("if_statement", kids)

    def _while_statement(self) -> Node:
        kids = [self._terminal(self._expect("while"))]
        kids.extend(self._paren_condition())
        kids.append(self._statement())
        return self._node("while_statement", kids)

    def _do_statement(self) -> Node:
        kids = [self._terminal(self._expect("do"))]
        kids.append(self._statement())
        kids.append(self._terminal(self._expect("while")))
        kids.extend(self._paren_condition())
        if self._at(";"):
            kids.append(self._terminal(self._advance()))
        return self._node("do_statement", kids)

    def _for_statement(self) -> Node:
        # tolerant for-control: segments separated by ';' until ')'
        kids = [self._terminal(self._expect("for"))]
        kids.append(self._terminal(self._expect("(")))
        while not self._at(")"):
            if self._peek() is None:
                raise ParseError("unterminated for control", len(self.source))
            if self._at(";"):
                kids.append(self._terminal(self._advance()))
                continue
            if self._looks_like_declaration():
                kids.append(self._variable_declaration(consume_semicolon=False))
            else:
                kids.append(self._expression())
                while self._at(","):
                    kids.append(self._terminal(self._advance()))
                    kids.append(self._expression())
        kids.append(self._terminal(self._expect(")")))
        kids.append(self._statement())
        return self._node("for_statement", kids)

    def _return_statement(self, keyword: str) -> Node:
        kids = [self._terminal(self._expect(keyword))]
        if not self._at(";") and self._peek() is not None:
            kids.append(self._expression())
        if self._at(";"):
            kids.append(self._terminal(self._advance()))
        kind = "return_statement" if keyword == "return" else "throw_statement"
        return self._node(kind, kids)

    def _expression_statement(self) -> Node:
        kids = [self._expression()]
        if self._at(";"):
            kids.append(self._terminal(self._advance()))
        return self._node("expression_statement", kids)

    # --- declarations ---------------------------------------------------

    def _looks_like_type_start(self, offset: int = 0) -> bool:
        tok = self._peek(offset)
        if tok is None:
            return False
        if tok.text in PRIMITIVE_TYPES and tok.text != "void":
            return True
        return tok.kind == "ident"

    def _looks_like_declaration(self) -> bool:
        tok = self._peek()
        if tok is None:
            return False
        if tok.text == "var" and self._peek(1) is not None and self._peek(1).kind == "ident":
            return True
        if tok.text in PRIMITIVE_TYPES:
            return True
        # Identifier type: "Foo x", "Foo[] x"
        if tok.kind == "ident":
            nxt = self._peek(1)
            if nxt is not None and nxt.kind == "ident":
                return True
            if (
                nxt is not None
                and nxt.text == "["
                and self._at("]", 2)
                and self._peek(3) is not None
                and self._peek(3).kind == "ident"
            ):
                return True
        return False

    def _type(self) -> Node:
        tok = self._advance()
        if tok.text in PRIMITIVE_TYPES:
            base = _leaf(tok, PRIMITIVE_TYPES[tok.text])
        elif tok.kind == "ident" or tok.text == "var":
            base = _leaf(tok, "type_identifier")
        else:
            raise ParseError(f"expected type, got {tok.text!r}", tok.start)
        while self._at("[") and self._at("]", 1):
            kids = [base, self._terminal(self._advance()), self._terminal(self._advance())]
            base = self._node("array_type", kids)
        return base

    def _variable_declaration(self, consume_semicolon: bool = True) -> Node:
        kids = [self._type()]
        while True:
            name = self._advance()
            if name.kind != "ident":
                raise ParseError(f"expected variable name, got {name.text!r}", name.start)
            decl_kids = [_leaf(name, "identifier")]
            if self._at("="):
                decl_kids.append(self._terminal(self._advance()))
                decl_kids.append(self._assignment_expression())
            kids.append(self._node("variable_declarator", decl_kids))
            if self._at(","):
                kids.append(self._terminal(self._advance()))
                continue
            break
        if consume_semicolon and self._at(";"):
            kids.append(self._terminal(self._advance()))
        return self._node("local_variable_declaration", kids)

    def _local_declaration_or_method(self) -> Node:
        # "type name (" starts a method; otherwise a variable declaration
        mark = self.pos
        try:
            type_node = self._type()
            name = self._peek()
            if name is not None and name.kind == "ident" and self._at("(", 1):
                self.pos = mark
                return self._method_declaration([])
        except ParseError:
            pass
        self.pos = mark
        return self._variable_declaration()

    def _declaration_with_modifiers(self) -> Node:
        mods = []
        while self._peek() is not None and self._peek().text in MODIFIERS:
            mods.append(self._terminal(self._advance()))
        if self._at("class") or self._at("interface") or self._at("enum"):
            return self._class_declaration(mods)
        if self._looks_like_declaration() or (self._peek() and self._peek().text == "void"):
            mark = self.pos
            try:
                self._type()
                name = self._peek()
                if name is not None and name.kind == "ident" and self._at("(", 1):
                    self.pos = mark
                    return self._method_declaration(mods)
            except ParseError:
                pass
            self.pos = mark
            node = self._variable_declaration()
            node.children = mods + node.children
            if mods:
                node.start = mods[0].start
            return node
        raise ParseError(
            "expected declaration after modifiers",
            self._peek().start if self._peek() else len(self.source),
        )

    def _class_declaration(self, mods: list[Node]) -> Node:
        kids = list(mods)
        kids.append(self._terminal(self._advance()))  # class/interface/enum
        name = self._advance()
        kids.append(_leaf(name, "identifier"))
        while not self._at("{"):
            if self._peek() is None:
                raise ParseError("expected class body", len(self.source))
            kids.append(self._terminal(self._advance()))
        kids.append(self._class_body())
        return self._node("class_declaration", kids)

    def _class_body(self) -> Node:
        kids = [self._terminal(self._expect("{"))]
        while not self._at("}"):
            if self._peek() is None:
                raise ParseError("unterminated class body", len(self.source))
            kids.append(self._statement())
        kids.append(self._terminal(self._expect("}")))
        return self._node("class_body", kids)

    def _method_declaration(self, mods: list[Node]) -> Node:
        kids = list(mods)
        kids.append(self._type())
        name = self._advance()
        kids.append(_leaf(name, "identifier"))
        params = [self._terminal(self._expect("("))]
        while not self._at(")"):
            if self._peek() is None:
                raise ParseError("unterminated parameter list", len(self.source))
            if self._at(","):
                params.append(self._terminal(self._advance()))
                continue
            ptype = self._type()
            pname = self._advance()
            params.append(
                self._node("formal_parameter", [ptype, _leaf(pname, "identifier")])
            )
        params.append(self._terminal(self._expect(")")))
        kids.append(self._node("formal_parameters", params))
        kids.append(self._block())
        return self._node("method_declaration", kids)

    # --- expressions ------------------------------------------------------

    def _expression(self) -> Node:
        return self._assignment_expression()

    def _assignment_expression(self) -> Node:
        left = self._ternary_expression()
        tok = self._peek()
        if tok is not None and tok.text in ASSIGNMENT_OPS:
            op = self._terminal(self._advance())
            right = self._assignment_expression()
            return self._node("assignment_expression", [left, op, right])
        return left

    def _ternary_expression(self) -> Node:
        cond = self._binary_expression(1)
        if self._at("?"):
            kids = [cond, self._terminal(self._advance())]
            kids.append(self._expression())
            kids.append(self._terminal(self._expect(":")))
            kids.append(self._ternary_expression())
            return self._node("ternary_expression", kids)
        return cond

    def _binary_expression(self, min_prec: int) -> Node:
        left = self._unary_expression()
        while True:
            tok = self._peek()
            if tok is None:
                return left
            prec = BINARY_PRECEDENCE.get(tok.text)
            if prec is None or prec < min_prec:
                return left
            op = self._terminal(self._advance())
            if tok.text == "instanceof":
                right = self._type()
                left = self._node("instanceof_expression", [left, op, right])
                continue
            right = self._binary_expression(prec + 1)
            left = self._node("binary_expression", [left, op, right])

    def _unary_expression(self) -> Node:
        tok = self._peek()
        if tok is None:
            raise ParseError("expected expression", len(self.source))
        if tok.text in ("++", "--"):
            op = self._terminal(self._advance())
            operand = self._unary_expression()
            return self._node("update_expression", [op, operand])
        if tok.text in ("+", "-", "!", "~"):
            op = self._terminal(self._advance())
            operand = self._unary_expression()
            return self._node("unary_expression", [op, operand])
        if tok.text == "(" and self._is_cast():
            open_paren = self._terminal(self._advance())
            type_node = self._type()
            close_paren = self._terminal(self._expect(")"))
            operand = self._unary_expression()
            return self._node(
                "cast_expression", [open_paren, type_node, close_paren, operand]
            )
        return self._postfix_expression()

    def _is_cast(self) -> bool:
        # only unambiguous primitive-type casts: "(int)", "(byte[])"
        tok = self._peek(1)
        if tok is None or tok.text not in PRIMITIVE_TYPES or tok.text == "void":
            return False
        offset = 2
        while self._at("[", offset) and self._at("]", offset + 1):
            offset += 2
        return self._at(")", offset)

    def _postfix_expression(self) -> Node:
        node = self._primary_expression()
        while True:
            tok = self._peek()
            if tok is None:
                return node
            if tok.text in ("++", "--"):
                op = self._terminal(self._advance())
                node = self._node("update_expression", [node, op])
                continue
            if tok.text == ".":
                dot = self._terminal(self._advance())
                name = self._advance()
                member = _leaf(name, "identifier")
                if self._at("("):
                    args = self._argument_list()
                    node = self._node("method_invocation", [node, dot, member, args])
                else:
                    node = self._node("field_access", [node, dot, member])
                continue
            if tok.text == "[":
                open_b = self._terminal(self._advance())
                index = self._expression()
                close_b = self._terminal(self._expect("]"))
                node = self._node("array_access", [node, open_b, index, close_b])
                continue
            if tok.text == "(" and node.kind == "identifier":
                args = self._argument_list()
                node = self._node("method_invocation", [node, args])
                continue
            return node

    def _argument_list(self) -> Node:
        kids = [self._terminal(self._expect("("))]
        while not self._at(")"):
            if self._peek() is None:
                raise ParseError("unterminated argument list", len(self.source))
            kids.append(self._expression())
            if self._at(","):
                kids.append(self._terminal(self._advance()))
        kids.append(self._terminal(self._expect(")")))
        return self._node("argument_list", kids)

    def _primary_expression(self) -> Node:
        tok = self._advance()
        if tok.kind == "number":
            return _leaf(tok, _literal_kind(tok.text))
        if tok.kind == "string":
            return _leaf(tok, "string_literal")
        if tok.kind == "char":
            return _leaf(tok, "character_literal")
        if tok.text in ("true", "false"):
            return _leaf(tok, "boolean_literal")
        if tok.text == "null":
            return _leaf(tok, "null_literal")
        if tok.text in ("this", "super"):
            return _leaf(tok, tok.text)
        if tok.kind == "ident":
            return _leaf(tok, "identifier")
        if tok.text == "(":
            open_paren = self._terminal(tok)
            inner = self._expression()
            close_paren = self._terminal(self._expect(")"))
            return self._node(
                "parenthesized_expression", [open_paren, inner, close_paren]
            )
        if tok.text == "new":
            kids = [self._terminal(tok), self._type()]
            if self._at("("):
                kids.append(self._argument_list())
            return self._node("object_creation_expression", kids)
        raise ParseError(f"unexpected token {tok.text!r}", tok.start)


def _set_parents(root: Node) -> None:
    for node in root.walk():
        for child in node.children:
            child.parent = node


def parse(source: str) -> Node:
    """Parse Java source into an AST rooted at a ``program`` node."""
    return Parser(source).parse_program()

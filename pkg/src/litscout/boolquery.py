"""Boolean scholarly-search queries: AST, parser, renderers, and matcher.

Grammar (EBNF):

    query    = or_expr ;
    or_expr  = and_expr , { OR , and_expr } ;
    and_expr = unit , { [ AND ] , unit } ;
    unit     = "(" , or_expr , ")" | phrase | term ;
    phrase   = '"' , word , { whitespace , word } , '"' ;
    term     = word ;

``AND`` and ``OR`` are case-insensitive reserved words, two adjacent units
are an implicit AND, and OR binds less tightly than AND.  Conjunction and
disjunction nodes are flattened per parenthesization level, so rendering a
parsed query and re-parsing it reproduces the same tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

from litscout.errors import InvariantError, QueryParseError
from litscout.evalkit.metrics import tokenize

if TYPE_CHECKING:
    from litscout.core.types import PaperMetadata

_RESERVED = ("AND", "OR")


def _check_word(word: str, *, label: str, allow_parens: bool) -> None:
    if not isinstance(word, str) or word == "":
        raise InvariantError(f"{label} must be a non-empty string")
    for ch in word:
        if ch.isspace():
            raise InvariantError(f"{label} must not contain whitespace: {word!r}")
        if ch == '"':
            raise InvariantError(f"{label} must not contain a quote: {word!r}")
        if not allow_parens and ch in "()":
            raise InvariantError(f"{label} must not contain parentheses: {word!r}")


@dataclass(frozen=True)
class Term:
    """A single bare search token."""

    word: str

    def __post_init__(self):
        _check_word(self.word, label="term word", allow_parens=False)
        if self.word.upper() in _RESERVED:
            raise InvariantError(f"term word must not be a reserved operator: {self.word!r}")


@dataclass(frozen=True)
class Phrase:
    """A quoted sequence of words that must appear contiguously."""

    words: tuple[str, ...]

    def __post_init__(self):
        words = tuple(self.words)
        object.__setattr__(self, "words", words)
        if not words:
            raise InvariantError("a phrase needs at least one word")
        for word in words:
            _check_word(word, label="phrase word", allow_parens=True)


@dataclass(frozen=True)
class And:
    """All children must match."""

    children: tuple["BooleanQueryAst", ...]

    def __post_init__(self):
        children = tuple(self.children)
        object.__setattr__(self, "children", children)
        if len(children) < 2:
            raise InvariantError("a conjunction needs at least two children")
        for child in children:
            if not isinstance(child, (Term, Phrase, And, Or)):
                raise InvariantError("conjunction children must be query nodes")


@dataclass(frozen=True)
class Or:
    """At least one child must match."""

    children: tuple["BooleanQueryAst", ...]

    def __post_init__(self):
        children = tuple(self.children)
        object.__setattr__(self, "children", children)
        if len(children) < 2:
            raise InvariantError("a disjunction needs at least two children")
        for child in children:
            if not isinstance(child, (Term, Phrase, And, Or)):
                raise InvariantError("disjunction children must be query nodes")


BooleanQueryAst = Union[Term, Phrase, And, Or]


@dataclass(frozen=True)
class _Token:
    kind: str  # LPAREN | RPAREN | AND | OR | WORD | PHRASE
    value: str | tuple[str, ...]
    pos: int  # character index into the source string


def _byte_offset(text: str, char_index: int) -> int:
    return len(text[:char_index].encode("utf-8"))


def _fail(text: str, message: str, char_index: int) -> None:
    raise QueryParseError(message, _byte_offset(text, char_index))


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    length = len(text)
    while i < length:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token("LPAREN", ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token("RPAREN", ch, i))
            i += 1
            continue
        if ch == '"':
            end = text.find('"', i + 1)
            if end == -1:
                _fail(text, "unterminated phrase", i)
            words = tuple(text[i + 1 : end].split())
            if not words:
                _fail(text, "empty phrase", i)
            tokens.append(_Token("PHRASE", words, i))
            i = end + 1
            continue
        start = i
        while i < length and not text[i].isspace() and text[i] not in '()"':
            i += 1
        word = text[start:i]
        upper = word.upper()
        if upper in _RESERVED:
            tokens.append(_Token(upper, word, start))
        else:
            tokens.append(_Token("WORD", word, start))
    return tokens


class _Parser:
    def __init__(self, text: str, tokens: list[_Token]):
        self.text = text
        self.tokens = tokens
        self.index = 0

    def at_end(self) -> bool:
        return self.index >= len(self.tokens)

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def parse_or(self) -> BooleanQueryAst:
        nodes = [self.parse_and()]
        while not self.at_end() and self.peek().kind == "OR":
            self.advance()
            nodes.append(self.parse_and())
        if len(nodes) == 1:
            return nodes[0]
        return Or(tuple(nodes))

    def parse_and(self) -> BooleanQueryAst:
        nodes = [self.parse_unit()]
        while not self.at_end():
            kind = self.peek().kind
            if kind == "AND":
                self.advance()
                nodes.append(self.parse_unit())
            elif kind in ("WORD", "PHRASE", "LPAREN"):
                nodes.append(self.parse_unit())
            else:
                break
        if len(nodes) == 1:
            return nodes[0]
        return And(tuple(nodes))

    def parse_unit(self) -> BooleanQueryAst:
        if self.at_end():
            _fail(self.text, "expected a term, phrase, or group", len(self.text))
        token = self.peek()
        if token.kind in ("AND", "OR"):
            _fail(self.text, f"expected a term, phrase, or group before {token.value!r}", token.pos)
        if token.kind == "RPAREN":
            _fail(self.text, "unmatched ')'", token.pos)
        if token.kind == "LPAREN":
            self.advance()
            if not self.at_end() and self.peek().kind == "RPAREN":
                _fail(self.text, "empty group", token.pos)
            node = self.parse_or()
            if self.at_end() or self.peek().kind != "RPAREN":
                _fail(self.text, "unclosed '('", token.pos)
            self.advance()
            return node
        token = self.advance()
        if token.kind == "PHRASE":
            return Phrase(token.value)
        return Term(token.value)


def parse_boolean_query(text: str) -> BooleanQueryAst:
    """Parse a Boolean query string into its AST.

    Raises :class:`QueryParseError` with the byte offset of the offending
    character on any malformed input, including an empty query.
    """
    if not isinstance(text, str):
        raise QueryParseError("query must be a string", 0)
    tokens = _lex(text)
    if not tokens:
        raise QueryParseError("query is empty", 0)
    parser = _Parser(text, tokens)
    node = parser.parse_or()
    if not parser.at_end():
        leftover = parser.peek()
        if leftover.kind == "RPAREN":
            _fail(text, "unmatched ')'", leftover.pos)
        _fail(text, f"unexpected {leftover.value!r}", leftover.pos)
    return node


def render_query(query: BooleanQueryAst, dialect: str = "canonical") -> str:
    """Render an AST back to a query string.

    ``canonical`` fully parenthesizes every conjunction/disjunction and
    quotes every phrase; parsing the result reproduces the input AST.
    ``plain`` joins all words with single spaces, dropping operators,
    quotes, and grouping.
    """
    if dialect == "canonical":
        return _render_canonical(query)
    if dialect == "plain":
        return " ".join(_collect_words(query))
    raise ValueError(f"unknown dialect {dialect!r}")


def _render_canonical(node: BooleanQueryAst) -> str:
    if isinstance(node, Term):
        return node.word
    if isinstance(node, Phrase):
        return '"' + " ".join(node.words) + '"'
    if isinstance(node, And):
        return "(" + " AND ".join(_render_canonical(c) for c in node.children) + ")"
    if isinstance(node, Or):
        return "(" + " OR ".join(_render_canonical(c) for c in node.children) + ")"
    raise TypeError(f"not a query node: {node!r}")


def _collect_words(node: BooleanQueryAst) -> list[str]:
    if isinstance(node, Term):
        return [node.word]
    if isinstance(node, Phrase):
        return list(node.words)
    if isinstance(node, (And, Or)):
        words: list[str] = []
        for child in node.children:
            words.extend(_collect_words(child))
        return words
    raise TypeError(f"not a query node: {node!r}")


def _contains_sequence(tokens: Sequence[str], seq: Sequence[str], token_set: frozenset | set) -> bool:
    if not seq:
        return False
    if len(seq) == 1:
        return seq[0] in token_set
    first = seq[0]
    limit = len(tokens) - len(seq) + 1
    for i in range(limit):
        if tokens[i] == first and list(tokens[i : i + len(seq)]) == list(seq):
            return True
    return False


def match_tokens(
    query: BooleanQueryAst,
    tokens: Sequence[str],
    token_set: frozenset | set | None = None,
) -> bool:
    """Evaluate a query against a pre-tokenized document."""
    if token_set is None:
        token_set = set(tokens)
    if isinstance(query, Term):
        return _contains_sequence(tokens, tokenize(query.word), token_set)
    if isinstance(query, Phrase):
        seq: list[str] = []
        for word in query.words:
            seq.extend(tokenize(word))
        return _contains_sequence(tokens, seq, token_set)
    if isinstance(query, And):
        return all(match_tokens(c, tokens, token_set) for c in query.children)
    if isinstance(query, Or):
        return any(match_tokens(c, tokens, token_set) for c in query.children)
    raise TypeError(f"not a query node: {query!r}")


def match_document(query: BooleanQueryAst, document: "PaperMetadata") -> bool:
    """True when the document's title plus abstract satisfies the query.

    Matching is case-insensitive over tokenized text: a term matches when
    its token occurs anywhere, a phrase only when its words occur
    contiguously in order.
    """
    tokens = tokenize(f"{document.title} {document.abstract}")
    return match_tokens(query, tokens)


def query_words(query: BooleanQueryAst) -> list[str]:
    """All words mentioned by the query, in rendering order."""
    return _collect_words(query)

"""Straight-line programs: the multivariate polynomial representation.

An Slp is a list of instructions, each one of ("in", i), ("par", j),
("add", a, b), ("sub", a, b) or ("mul", a, b), where a, b index earlier
instructions.  Programs are division-free; the length is the number of
arithmetic instructions.  Parameters of a freshly parsed program are plain
integers, so the same program can be evaluated over any ring (canonical
embedding of the parameters).  Programs produced by `compose_linear` or
`specialize` may carry ring-element parameters and are then bound to that
ring (`Slp.ring`).

The expression grammar for system files: terms over variables x1..x<n>,
integer literals, rational literals a/b, and the operators + - * ^ ( ).
Rational coefficients are cleared at parse time: each polynomial is
multiplied by a common multiple of its literal denominators (tracked
per node, lcm at additions), which preserves the zero set; the multiplier
is recorded in the SystemSpec.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from . import linalg
from .errors import ExprSyntaxError, SingularMatrix, UnknownVariable


@dataclass
class Slp:
    n_vars: int
    params: list
    instrs: list
    outputs: list
    ring: object = None  # None while all parameters are plain integers

    @property
    def length(self) -> int:
        """Number of arithmetic instructions."""
        return sum(1 for ins in self.instrs if ins[0] in ("add", "sub", "mul"))


@dataclass
class SystemSpec:
    """A system F_1, ..., F_r, G carried by one straight-line program.

    The program has r + 1 outputs with G last.  `degrees` are per-output
    degree bounds (G included), derived by interval propagation through the
    instructions; `denominators` records the clearing multiplier applied to
    each output; `height` bounds the bit length of the integer parameters.
    """

    n: int
    r: int
    slp: Slp
    degrees: list
    denominators: list = field(default_factory=list)
    height: int = 1

    def __post_init__(self):
        if self.r > self.n:
            raise ValueError("more equations than variables")
        if any(d < 1 for d in self.degrees[: self.r]):
            raise ValueError("each equation needs degree at least 1")

    @property
    def dmax(self) -> int:
        return max(1, max(self.degrees))

    @property
    def bezout(self) -> int:
        out = 1
        for d in self.degrees[: self.r]:
            out *= max(1, d)
        return out


def evaluate(slp: Slp, values, ring):
    """Evaluate every output at the given assignment over `ring`.

    The assignment values may live in any ring implementing the protocol
    (a quotient ring or series ring included); parameters are coerced via
    `ring.coerce`.
    """
    if len(values) != slp.n_vars:
        raise ValueError(f"expected {slp.n_vars} values, got {len(values)}")
    vals = [None] * len(slp.instrs)
    params = [None] * len(slp.params)
    for idx, ins in enumerate(slp.instrs):
        op = ins[0]
        if op == "in":
            vals[idx] = values[ins[1]]
        elif op == "par":
            j = ins[1]
            if params[j] is None:
                params[j] = ring.coerce(slp.params[j])
            vals[idx] = params[j]
        elif op == "add":
            vals[idx] = ring.add(vals[ins[1]], vals[ins[2]])
        elif op == "sub":
            vals[idx] = ring.sub(vals[ins[1]], vals[ins[2]])
        else:
            vals[idx] = ring.mul(vals[ins[1]], vals[ins[2]])
    return [vals[o] for o in slp.outputs]


def max_degrees(slp: Slp):
    """Interval-degree propagation: an upper bound on each output's degree."""
    degs = [0] * len(slp.instrs)
    for idx, ins in enumerate(slp.instrs):
        op = ins[0]
        if op == "in":
            degs[idx] = 1
        elif op == "par":
            degs[idx] = 0
        elif op == "mul":
            degs[idx] = degs[ins[1]] + degs[ins[2]]
        else:
            degs[idx] = max(degs[ins[1]], degs[ins[2]])
    return [degs[o] for o in slp.outputs]


def gradient(slp: Slp, output_index: int) -> Slp:
    """Reverse-sweep differentiation: an Slp computing all n first partial
    derivatives of the chosen output.  Length at most 5x the input length."""
    instrs = list(slp.instrs)
    params = list(slp.params)

    def par(value):
        params.append(value)
        instrs.append(("par", len(params) - 1))
        return len(instrs) - 1

    def emit(op, a, b):
        instrs.append((op, a, b))
        return len(instrs) - 1

    one_idx = par(1)
    zero_idx = None
    adj = {slp.outputs[output_index]: one_idx}
    for idx in range(len(slp.instrs) - 1, -1, -1):
        if idx not in adj:
            continue
        ins = slp.instrs[idx]
        op = ins[0]
        if op in ("in", "par"):
            continue
        a, b = ins[1], ins[2]
        g = adj[idx]
        if op == "add":
            _accumulate(adj, a, g, emit)
            _accumulate(adj, b, g, emit)
        elif op == "sub":
            _accumulate(adj, a, g, emit)
            if zero_idx is None:
                zero_idx = par(0)
            _accumulate(adj, b, emit("sub", zero_idx, g), emit)
        else:  # mul
            _accumulate(adj, a, emit("mul", g, b), emit)
            _accumulate(adj, b, emit("mul", g, a), emit)
    outputs = []
    by_var = {}
    for idx, ins in enumerate(slp.instrs):
        if ins[0] == "in":
            by_var.setdefault(ins[1], []).append(idx)
    for i in range(slp.n_vars):
        acc = None
        for idx in by_var.get(i, []):
            if idx in adj:
                acc = adj[idx] if acc is None else emit("add", acc, adj[idx])
        if acc is None:
            if zero_idx is None:
                zero_idx = par(0)
            acc = zero_idx
        outputs.append(acc)
    return Slp(slp.n_vars, params, instrs, outputs, ring=slp.ring)


def _accumulate(adj, node, contribution, emit):
    if node in adj:
        adj[node] = emit("add", adj[node], contribution)
    else:
        adj[node] = contribution


def compose_linear(slp: Slp, lam, ring) -> Slp:
    """Rewrite the outputs in the variables Y = lam . X, i.e. return a
    program for F(lam^{-1} Y).  Raises SingularMatrix if lam is not
    invertible over the ring."""
    if slp.ring is not None and slp.ring != ring:
        raise ValueError("program already bound to a different ring")
    n = slp.n_vars
    lam = [[ring.coerce(c) for c in row] for row in lam]
    inv = linalg.mat_inv(ring, lam)
    params = list(slp.params)
    instrs = []

    def par(value):
        params.append(value)
        instrs.append(("par", len(params) - 1))
        return len(instrs) - 1

    y_nodes = []
    for i in range(n):
        instrs.append(("in", i))
        y_nodes.append(len(instrs) - 1)
    zero_idx = None
    x_nodes = []
    for i in range(n):
        acc = None
        for j in range(n):
            c = inv[i][j]
            if ring.is_zero(c):
                continue
            if c == ring.one:
                term = y_nodes[j]
            else:
                cj = par(c)
                instrs.append(("mul", cj, y_nodes[j]))
                term = len(instrs) - 1
            if acc is None:
                acc = term
            else:
                instrs.append(("add", acc, term))
                acc = len(instrs) - 1
        if acc is None:
            if zero_idx is None:
                zero_idx = par(ring.zero)
            acc = zero_idx
        x_nodes.append(acc)
    offset = len(instrs)
    remap = {}
    for idx, ins in enumerate(slp.instrs):
        op = ins[0]
        if op == "in":
            remap[idx] = x_nodes[ins[1]]
            continue
        if op == "par":
            instrs.append(ins)
        else:
            instrs.append((op, remap[ins[1]], remap[ins[2]]))
        remap[idx] = len(instrs) - 1
    outputs = [remap[o] for o in slp.outputs]
    return Slp(n, params, instrs, outputs, ring=ring)


def specialize(slp: Slp, fixed, ring=None) -> Slp:
    """Fix the first k variables to the given values (ring elements or
    integers); the result is a program in n - k variables."""
    k = len(fixed)
    if k > slp.n_vars:
        raise ValueError("more fixed values than variables")
    params = list(slp.params) + list(fixed)
    instrs = []
    remap = {}
    for idx, ins in enumerate(slp.instrs):
        op = ins[0]
        if op == "in":
            i = ins[1]
            if i < k:
                instrs.append(("par", len(slp.params) + i))
            else:
                instrs.append(("in", i - k))
        elif op == "par":
            instrs.append(ins)
        else:
            instrs.append((op, remap[ins[1]], remap[ins[2]]))
        remap[idx] = len(instrs) - 1
    outputs = [remap[o] for o in slp.outputs]
    bound = slp.ring if slp.ring is not None else ring
    return Slp(slp.n_vars - k, params, instrs, outputs, ring=bound)


def merge(slps) -> Slp:
    """Concatenate single-output portable programs into one multi-output
    program over the shared variables."""
    n = slps[0].n_vars
    params: list = []
    instrs: list = []
    outputs: list = []
    var_nodes = {}
    for part in slps:
        if part.n_vars != n:
            raise ValueError("variable counts differ")
        if part.ring is not None:
            raise ValueError("only portable programs can be merged")
        offset_p = len(params)
        params.extend(part.params)
        remap = {}
        for idx, ins in enumerate(part.instrs):
            op = ins[0]
            if op == "in":
                i = ins[1]
                if i not in var_nodes:
                    instrs.append(("in", i))
                    var_nodes[i] = len(instrs) - 1
                remap[idx] = var_nodes[i]
                continue
            if op == "par":
                instrs.append(("par", ins[1] + offset_p))
            else:
                instrs.append((op, remap[ins[1]], remap[ins[2]]))
            remap[idx] = len(instrs) - 1
        outputs.extend(remap[o] for o in part.outputs)
    return Slp(n, params, instrs, outputs)


# ---------------------------------------------------------------------------
# expression parser


_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class _Parser:
    def __init__(self, text: str, n_vars: int):
        self.text = text
        self.n_vars = n_vars
        self.tokens = self._tokenize(text)
        self.pos = 0
        self.params: list = []
        self.instrs: list = []
        self._var_nodes = {}
        self._par_cache = {}

    @staticmethod
    def _tokenize(text):
        tokens = []
        line, col = 1, 1
        i = 0
        while i < len(text):
            ch = text[i]
            if ch == "\n":
                line += 1
                col = 1
                i += 1
                continue
            if ch.isspace():
                i += 1
                col += 1
                continue
            m = _TOKEN_RE.match(text, i)
            num, name, sym = m.group(1), m.group(2), m.group(3)
            tok = num or name or sym
            kind = "int" if num else "name" if name else "sym"
            tokens.append((kind, tok, line, col))
            col += m.end() - i
            i = m.end()
        tokens.append(("eof", "", line, col))
        return tokens

    def _peek(self):
        return self.tokens[self.pos]

    def _next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def _error(self, message, tok=None):
        tok = tok or self._peek()
        raise ExprSyntaxError(message, tok[2], tok[3])

    def _par(self, value: int):
        if value not in self._par_cache:
            self.params.append(value)
            self.instrs.append(("par", len(self.params) - 1))
            self._par_cache[value] = len(self.instrs) - 1
        return self._par_cache[value]

    def _var(self, i: int):
        if i not in self._var_nodes:
            self.instrs.append(("in", i))
            self._var_nodes[i] = len(self.instrs) - 1
        return self._var_nodes[i]

    def _emit(self, op, a, b):
        self.instrs.append((op, a, b))
        return len(self.instrs) - 1

    # each node is a pair (instruction index, denominator int): the pair
    # (u, d) stands for the rational polynomial u / d

    def parse(self):
        node = self._expr()
        tok = self._peek()
        if tok[0] != "eof":
            self._error(f"unexpected {tok[1]!r}")
        u, d = node
        return Slp(self.n_vars, self.params, self.instrs, [u]), d

    def _expr(self):
        u, d = self._term()
        while True:
            tok = self._peek()
            if tok[0] == "sym" and tok[1] in "+-":
                self._next()
                v, e = self._term()
                l = d * e // math.gcd(d, e)
                if l // d != 1:
                    u = self._emit("mul", u, self._par(l // d))
                if l // e != 1:
                    v = self._emit("mul", v, self._par(l // e))
                u = self._emit("add" if tok[1] == "+" else "sub", u, v)
                d = l
            else:
                return u, d

    def _term(self):
        u, d = self._unary()
        while True:
            tok = self._peek()
            if tok[0] == "sym" and tok[1] == "*":
                self._next()
                v, e = self._unary()
                u = self._emit("mul", u, v)
                d *= e
            else:
                return u, d

    def _unary(self):
        sign = 1
        while True:
            tok = self._peek()
            if tok[0] == "sym" and tok[1] in "+-":
                self._next()
                if tok[1] == "-":
                    sign = -sign
            else:
                break
        u, d = self._power()
        if sign < 0:
            u = self._emit("mul", u, self._par(-1))
        return u, d

    def _power(self):
        u, d = self._atom()
        tok = self._peek()
        if tok[0] == "sym" and tok[1] == "^":
            self._next()
            etok = self._next()
            if etok[0] != "int":
                self._error("exponent must be a nonnegative integer", etok)
            k = int(etok[1])
            u, d = self._pow_node(u, d, k)
        return u, d

    def _pow_node(self, u, d, k):
        if k == 0:
            return self._par(1), 1
        if k == 1:
            return u, d
        acc = u
        for bit in bin(k)[3:]:
            acc = self._emit("mul", acc, acc)
            if bit == "1":
                acc = self._emit("mul", acc, u)
        return acc, d**k

    def _atom(self):
        tok = self._next()
        if tok[0] == "int":
            num = int(tok[1])
            nxt = self._peek()
            if nxt[0] == "sym" and nxt[1] == "/":
                self._next()
                dtok = self._next()
                if dtok[0] != "int":
                    self._error("denominator must be an integer literal", dtok)
                den = int(dtok[1])
                if den == 0:
                    self._error("zero denominator", dtok)
                g = math.gcd(num, den)
                return self._par(num // g), den // g
            return self._par(num), 1
        if tok[0] == "name":
            m = re.fullmatch(r"x(\d+)", tok[1])
            if not m:
                raise UnknownVariable(f"unknown variable {tok[1]!r}", tok[2], tok[3])
            i = int(m.group(1))
            if not 1 <= i <= self.n_vars:
                raise UnknownVariable(
                    f"variable {tok[1]!r} out of range 1..{self.n_vars}", tok[2], tok[3]
                )
            return self._var(i - 1), 1
        if tok[0] == "sym" and tok[1] == "(":
            node = self._expr()
            close = self._next()
            if close[0] != "sym" or close[1] != ")":
                self._error("expected ')'", close)
            return node
        self._error(f"unexpected {tok[1]!r}", tok)


def parse_expression(text: str, n_vars: int):
    """Parse one polynomial expression; returns (single-output Slp, the
    denominator-clearing multiplier applied to it)."""
    return _Parser(text, n_vars).parse()


def build_system(f_texts, g_text, n: int, height: int | None = None) -> SystemSpec:
    """Parse F equations and the optional inequality polynomial G (default 1)
    into a SystemSpec with one merged program, G as the last output."""
    parts = []
    dens = []
    for text in f_texts:
        part, den = parse_expression(text, n)
        parts.append(part)
        dens.append(den)
    g_part, g_den = parse_expression(g_text if g_text is not None else "1", n)
    parts.append(g_part)
    dens.append(g_den)
    merged = merge(parts)
    degrees = max_degrees(merged)
    if height is None:
        height = 1
        for p in merged.params:
            height = max(height, abs(p).bit_length())
    return SystemSpec(
        n=n,
        r=len(f_texts),
        slp=merged,
        degrees=degrees,
        denominators=dens,
        height=height,
    )

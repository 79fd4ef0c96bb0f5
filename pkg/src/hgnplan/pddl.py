"""PDDL reader for the typed STRIPS fragment with constant action costs.

Supported requirements: :strips, :typing, :action-costs. Anything else is
rejected with an error naming the requirement. Negative preconditions,
conditional effects, axioms and numeric fluents (other than a constant
``(increase (total-cost) n)`` effect) are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass

ROOT_TYPE = "object"
SUPPORTED_REQUIREMENTS = frozenset({":strips", ":typing", ":action-costs"})


class PddlError(Exception):
    """Malformed or unsupported PDDL input."""


class PddlSyntaxError(PddlError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnsupportedRequirementError(PddlError):
    def __init__(self, requirement: str):
        super().__init__(f"unsupported requirement {requirement}")
        self.requirement = requirement


# ---------------------------------------------------------------------------
# s-expression layer


@dataclass(frozen=True)
class Symbol:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    column: int


def _tokenize(text: str):
    """Yield (kind, value, line, column); kinds are '(', ')' and 'symbol'."""
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":  # comment to end of line
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, ch, line, col
            i += 1
            col += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            # PDDL identifiers are case-insensitive
            yield "symbol", text[start:i].lower(), line, start_col
    yield "eof", "", line, col


def _read_sexprs(text: str) -> list:
    """Parse the full text into a list of top-level s-expressions."""
    stack: list[list] = []
    positions: list[tuple[int, int]] = []
    top: list = []
    for kind, value, line, col in _tokenize(text):
        if kind == "(":
            stack.append([])
            positions.append((line, col))
        elif kind == ")":
            if not stack:
                raise PddlSyntaxError("unbalanced ')'", line, col)
            items = stack.pop()
            oline, ocol = positions.pop()
            node = SList(tuple(items), oline, ocol)
            (stack[-1] if stack else top).append(node)
        elif kind == "symbol":
            node = Symbol(value, line, col)
            (stack[-1] if stack else top).append(node)
        else:  # eof
            if stack:
                oline, ocol = positions[-1]
                raise PddlSyntaxError("unclosed '('", oline, ocol)
    return top


def _expect_symbol(node, what: str) -> Symbol:
    if not isinstance(node, Symbol):
        raise PddlSyntaxError(f"expected {what}", node.line, node.column)
    return node


def _expect_list(node, what: str) -> SList:
    if not isinstance(node, SList):
        raise PddlSyntaxError(f"expected {what}", node.line, node.column)
    return node


def _head(node: SList) -> str:
    if not node.items or not isinstance(node.items[0], Symbol):
        raise PddlSyntaxError("expected a keyword-headed list", node.line, node.column)
    return node.items[0].text


# ---------------------------------------------------------------------------
# domain model


@dataclass(frozen=True)
class Atom:
    """Predicate applied to arguments; args are '?variables' or object names."""

    predicate: str
    args: tuple[str, ...]

    def format(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"


@dataclass(frozen=True)
class Predicate:
    name: str
    params: tuple[tuple[str, str], ...]  # (variable, type)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]
    preconditions: tuple[Atom, ...]
    add_effects: tuple[Atom, ...]
    del_effects: tuple[Atom, ...]
    cost: float | int = 1


@dataclass(frozen=True)
class DomainDef:
    name: str
    types: dict[str, str]  # type -> parent; ROOT_TYPE maps to itself
    constants: tuple[tuple[str, str], ...]
    predicates: tuple[Predicate, ...]
    schemas: tuple[ActionSchema, ...]
    requirements: frozenset[str]

    def predicate(self, name: str) -> Predicate | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None

    def is_subtype(self, child: str, ancestor: str) -> bool:
        if ancestor == ROOT_TYPE:
            return True
        t = child
        while True:
            if t == ancestor:
                return True
            parent = self.types[t]
            if parent == t:
                return False
            t = parent


@dataclass(frozen=True)
class ProblemDef:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]  # problem objects, excluding constants
    init: tuple[Atom, ...]
    goal: tuple[Atom, ...]


# ---------------------------------------------------------------------------
# shared pieces


def _parse_typed_list(items, what: str) -> list[tuple[str, str]]:
    """Parse ``a b - t c d`` into [(a,t),(b,t),(c,object),(d,object)]."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        sym = _expect_symbol(items[i], f"name in {what}")
        if sym.text == "-":
            if not pending:
                raise PddlSyntaxError(f"dangling '-' in {what}", sym.line, sym.column)
            if i + 1 >= len(items):
                raise PddlSyntaxError(f"missing type after '-' in {what}", sym.line, sym.column)
            type_sym = _expect_symbol(items[i + 1], f"type in {what}")
            out.extend((name, type_sym.text) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(sym.text)
            i += 1
    out.extend((name, ROOT_TYPE) for name in pending)
    return out


def _parse_atom(node: SList) -> Atom:
    if not node.items:
        raise PddlSyntaxError("empty atom", node.line, node.column)
    name = _expect_symbol(node.items[0], "predicate name").text
    args = tuple(_expect_symbol(a, "atom argument").text for a in node.items[1:])
    return Atom(name, args)


def _parse_number(sym: Symbol) -> float | int:
    try:
        return int(sym.text)
    except ValueError:
        try:
            return float(sym.text)
        except ValueError:
            raise PddlSyntaxError(f"expected a number, got '{sym.text}'", sym.line, sym.column) from None


def _check_atom(atom: Atom, dom: "DomainDef", known_args: dict[str, str], context: str) -> None:
    """Arity, declared-predicate and type checks for one atom."""
    pred = dom.predicate(atom.predicate)
    if pred is None:
        raise PddlError(f"unknown predicate '{atom.predicate}' in {context}")
    if len(atom.args) != len(pred.params):
        raise PddlError(
            f"predicate '{atom.predicate}' expects {len(pred.params)} arguments, "
            f"got {len(atom.args)} in {context}"
        )
    for arg, (_, expected_type) in zip(atom.args, pred.params):
        if arg not in known_args:
            kind = "variable" if arg.startswith("?") else "object"
            raise PddlError(f"unknown {kind} '{arg}' in {context}")
        if not dom.is_subtype(known_args[arg], expected_type):
            raise PddlError(
                f"argument '{arg}' of type '{known_args[arg]}' is not a '{expected_type}' "
                f"in {context}"
            )


# ---------------------------------------------------------------------------
# domain


def parse_domain(text: str) -> DomainDef:
    """Parse PDDL domain text into a :class:`DomainDef`."""
    top = _read_sexprs(text)
    if len(top) != 1:
        raise PddlError("expected exactly one (define ...) form in the domain file")
    define = _expect_list(top[0], "(define ...)")
    if _head(define) != "define":
        raise PddlSyntaxError("expected (define ...)", define.line, define.column)
    sections = list(define.items[1:])
    if not sections:
        raise PddlSyntaxError("missing (domain ...) declaration", define.line, define.column)
    decl = _expect_list(sections[0], "(domain NAME)")
    if _head(decl) != "domain" or len(decl.items) != 2:
        raise PddlSyntaxError("expected (domain NAME)", decl.line, decl.column)
    name = _expect_symbol(decl.items[1], "domain name").text

    requirements: set[str] = {":strips"}
    types: dict[str, str] = {ROOT_TYPE: ROOT_TYPE}
    constants: list[tuple[str, str]] = []
    predicates: list[Predicate] = []
    schemas: list[ActionSchema] = []

    for section in sections[1:]:
        sec = _expect_list(section, "domain section")
        head = _head(sec)
        if head == ":requirements":
            for req in sec.items[1:]:
                sym = _expect_symbol(req, "requirement")
                if sym.text not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirementError(sym.text)
                requirements.add(sym.text)
        elif head == ":types":
            for type_name, parent in _parse_typed_list(sec.items[1:], ":types"):
                types[type_name] = parent
                types.setdefault(parent, ROOT_TYPE)
        elif head == ":constants":
            constants.extend(_parse_typed_list(sec.items[1:], ":constants"))
        elif head == ":predicates":
            for pnode in sec.items[1:]:
                plist = _expect_list(pnode, "predicate declaration")
                pname = _expect_symbol(plist.items[0], "predicate name").text
                params = tuple(_parse_typed_list(plist.items[1:], f"predicate {pname}"))
                if any(p.name == pname for p in predicates):
                    raise PddlError(f"duplicate predicate '{pname}'")
                predicates.append(Predicate(pname, params))
        elif head == ":functions":
            _check_functions_section(sec)
        elif head == ":action":
            schemas.append(_parse_action(sec, requirements))
        else:
            raise PddlSyntaxError(f"unsupported domain section '{head}'", sec.line, sec.column)

    # types referenced anywhere must exist
    for type_name, parent in list(types.items()):
        if parent not in types:
            raise PddlError(f"unknown parent type '{parent}' for type '{type_name}'")
    for obj, t in constants:
        if t not in types:
            raise PddlError(f"unknown type '{t}' for constant '{obj}'")
    for pred in predicates:
        for _, t in pred.params:
            if t not in types:
                raise PddlError(f"unknown type '{t}' in predicate '{pred.name}'")

    seen_schema_names = set()
    for schema in schemas:
        if schema.name in seen_schema_names:
            raise PddlError(f"duplicate action '{schema.name}'")
        seen_schema_names.add(schema.name)

    dom = DomainDef(
        name=name,
        types=types,
        constants=tuple(constants),
        predicates=tuple(predicates),
        schemas=tuple(schemas),
        requirements=frozenset(requirements),
    )
    _validate_schemas(dom)
    return dom


def _check_functions_section(sec: SList) -> None:
    # only a 0-ary total-cost function is supported
    for fnode in sec.items[1:]:
        if isinstance(fnode, Symbol) and fnode.text == "-":
            raise PddlSyntaxError("typed functions are not supported", fnode.line, fnode.column)
        flist = _expect_list(fnode, "function declaration")
        fname = _expect_symbol(flist.items[0], "function name").text
        if fname != "total-cost" or len(flist.items) != 1:
            raise PddlError(f"unsupported function '{fname}' (only 0-ary total-cost)")


def _parse_action(sec: SList, requirements: set[str]) -> ActionSchema:
    if len(sec.items) < 2:
        raise PddlSyntaxError("missing action name", sec.line, sec.column)
    name = _expect_symbol(sec.items[1], "action name").text
    params: tuple[tuple[str, str], ...] = ()
    pre: tuple[Atom, ...] = ()
    add: list[Atom] = []
    dele: list[Atom] = []
    cost: float | int = 1

    i = 2
    items = sec.items
    while i < len(items):
        key = _expect_symbol(items[i], "action keyword").text
        if i + 1 >= len(items):
            raise PddlSyntaxError(f"missing value for {key}", sec.line, sec.column)
        value = items[i + 1]
        if key == ":parameters":
            params = tuple(_parse_typed_list(_expect_list(value, "parameter list").items,
                                             f"parameters of {name}"))
        elif key == ":precondition":
            pre = tuple(_parse_condition(value, name))
        elif key == ":effect":
            add, dele, cost = _parse_effect(_expect_list(value, "effect"), name, requirements)
        else:
            raise PddlSyntaxError(f"unsupported action keyword '{key}'", sec.line, sec.column)
        i += 2

    return ActionSchema(name, params, pre, tuple(add), tuple(dele), cost)


def _parse_condition(node, action: str) -> list[Atom]:
    cond = _expect_list(node, "precondition")
    if not cond.items:
        return []  # (and) / ()
    head = cond.items[0]
    if isinstance(head, Symbol) and head.text == "and":
        atoms = []
        for sub in cond.items[1:]:
            atoms.extend(_parse_condition_atom(sub, action))
        return atoms
    return _parse_condition_atom(cond, action)


def _parse_condition_atom(node, action: str) -> list[Atom]:
    atom_list = _expect_list(node, "precondition atom")
    head = _head(atom_list)
    if head == "not":
        raise PddlError(f"negative precondition in action '{action}' is not supported")
    if head in ("or", "imply", "exists", "forall", "when"):
        raise PddlError(f"'{head}' condition in action '{action}' is not supported")
    return [_parse_atom(atom_list)]


def _parse_effect(node: SList, action: str, requirements: set[str]):
    adds: list[Atom] = []
    dels: list[Atom] = []
    cost: float | int = 1
    parts = node.items[1:] if (node.items and isinstance(node.items[0], Symbol)
                               and node.items[0].text == "and") else [node]
    for part in parts:
        plist = _expect_list(part, "effect element")
        head = _head(plist)
        if head == "not":
            if len(plist.items) != 2:
                raise PddlSyntaxError("(not ...) takes one atom", plist.line, plist.column)
            dels.append(_parse_atom(_expect_list(plist.items[1], "deleted atom")))
        elif head == "increase":
            if ":action-costs" not in requirements:
                raise PddlError(f"action '{action}' uses (increase ...) without :action-costs")
            if len(plist.items) != 3:
                raise PddlSyntaxError("expected (increase (total-cost) N)", plist.line, plist.column)
            target = _expect_list(plist.items[1], "(total-cost)")
            if _head(target) != "total-cost":
                raise PddlError(f"action '{action}' may only increase total-cost")
            amount = _expect_symbol(plist.items[2], "cost value")
            cost = _parse_number(amount)
            if cost < 0:
                raise PddlError(f"negative cost in action '{action}'")
        elif head in ("when", "forall"):
            raise PddlError(f"'{head}' effect in action '{action}' is not supported")
        else:
            adds.append(_parse_atom(plist))
    return adds, dels, cost


def _validate_schemas(dom: DomainDef) -> None:
    const_types = dict(dom.constants)
    for schema in dom.schemas:
        known: dict[str, str] = dict(const_types)
        for var, t in schema.params:
            if not var.startswith("?"):
                raise PddlError(f"parameter '{var}' of action '{schema.name}' must start with '?'")
            if t not in dom.types:
                raise PddlError(f"unknown type '{t}' in action '{schema.name}'")
            known[var] = t
        for group, atoms in (("precondition", schema.preconditions),
                             ("add effect", schema.add_effects),
                             ("delete effect", schema.del_effects)):
            for atom in atoms:
                _check_atom(atom, dom, known, f"{group} of action '{schema.name}'")


# ---------------------------------------------------------------------------
# problem


def parse_problem(text: str, dom: DomainDef) -> ProblemDef:
    """Parse PDDL problem text against a parsed domain."""
    top = _read_sexprs(text)
    if len(top) != 1:
        raise PddlError("expected exactly one (define ...) form in the problem file")
    define = _expect_list(top[0], "(define ...)")
    if _head(define) != "define":
        raise PddlSyntaxError("expected (define ...)", define.line, define.column)
    sections = list(define.items[1:])
    if not sections:
        raise PddlSyntaxError("missing (problem ...) declaration", define.line, define.column)
    decl = _expect_list(sections[0], "(problem NAME)")
    if _head(decl) != "problem" or len(decl.items) != 2:
        raise PddlSyntaxError("expected (problem NAME)", decl.line, decl.column)
    name = _expect_symbol(decl.items[1], "problem name").text

    domain_name: str | None = None
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    goal: list[Atom] = []

    for section in sections[1:]:
        sec = _expect_list(section, "problem section")
        head = _head(sec)
        if head == ":domain":
            domain_name = _expect_symbol(sec.items[1], "domain name").text
        elif head == ":objects":
            objects.extend(_parse_typed_list(sec.items[1:], ":objects"))
        elif head == ":init":
            for fact in sec.items[1:]:
                flist = _expect_list(fact, "init fact")
                if _head(flist) == "=":  # (= (total-cost) 0) initializer
                    continue
                init.append(_parse_atom(flist))
        elif head == ":goal":
            goal = _parse_condition(sec.items[1], f"goal of problem '{name}'")
        elif head == ":metric":
            pass  # minimize total-cost is implied
        else:
            raise PddlSyntaxError(f"unsupported problem section '{head}'", sec.line, sec.column)

    if domain_name != dom.name:
        raise PddlError(
            f"problem '{name}' references domain '{domain_name}', expected '{dom.name}'"
        )

    known: dict[str, str] = dict(dom.constants)
    for obj, t in objects:
        if t not in dom.types:
            raise PddlError(f"unknown type '{t}' for object '{obj}'")
        if obj in known:
            raise PddlError(f"object '{obj}' shadows a domain constant")
        known[obj] = t
    for group, atoms in (("init", init), ("goal", goal)):
        for atom in atoms:
            _check_atom(atom, dom, known, f"{group} of problem '{name}'")

    return ProblemDef(name, dom.name, tuple(objects), tuple(init), tuple(goal))

//! The PDDL subset: typed STRIPS, one increasing cost fluent `total-cost`,
//! and the budget guard `(<= (+ (total-cost) C) (budget-limit))`.
//!
//! Quantifiers, disjunction, negative preconditions, conditional effects and
//! durative actions are rejected with a descriptive error.

mod sexpr;

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::money::NO_BUDGET_SENTINEL;
use sexpr::Sexpr;

pub const COST_FLUENT: &str = "total-cost";
pub const BUDGET_FLUENT: &str = "budget-limit";

/// The shipped optical deployment domain.
pub const OPTICAL_DOMAIN_PDDL: &str = include_str!("../../data/optical-deployment.pddl");

/// Parses [`OPTICAL_DOMAIN_PDDL`].
pub fn optical_domain() -> Domain {
    Domain::parse(OPTICAL_DOMAIN_PDDL).expect("shipped domain parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PddlErrorKind {
    Syntax,
    Unsupported,
    Undeclared,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PddlError {
    pub kind: PddlErrorKind,
    pub line: Option<usize>,
    pub message: String,
}

impl PddlError {
    fn new(kind: PddlErrorKind, line: Option<usize>, message: impl Into<String>) -> Self {
        PddlError {
            kind,
            line,
            message: message.into(),
        }
    }

    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Self::new(PddlErrorKind::Syntax, Some(line), message)
    }

    fn at(kind: PddlErrorKind, e: &Sexpr, message: impl Into<String>) -> Self {
        Self::new(kind, Some(e.line()), message)
    }
}

impl fmt::Display for PddlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// `name - type`, used for parameters, objects and type declarations (where
/// `ty` is the parent type).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Typed {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSchema {
    pub name: String,
    pub params: Vec<Typed>,
}

/// A literal: predicate applied to variables (`?x`) in schemas or to object
/// names in problems.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.iter().map(|a| (*a).to_owned()).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<Typed>,
    pub preconditions: Vec<Atom>,
    /// `C` in `(<= (+ (total-cost) C) (budget-limit))`.
    pub guard: Option<u64>,
    pub add: Vec<Atom>,
    pub delete: Vec<Atom>,
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent type.
    pub types: Vec<Typed>,
    pub predicates: Vec<PredicateSchema>,
    pub functions: Vec<String>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<Typed>,
    pub init: Vec<Atom>,
    pub budget_limit: u64,
    pub goals: Vec<Atom>,
}

const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":action-costs",
    ":numeric-fluents",
    ":fluents",
];

const UNSUPPORTED_HEADS: &[&str] = &[
    "forall", "exists", "when", "or", "imply", "not", "decrease", "assign", "scale-up",
    "scale-down", ">=", ">", "<", "=",
];

fn unsupported(e: &Sexpr, what: &str) -> PddlError {
    PddlError::at(
        PddlErrorKind::Unsupported,
        e,
        format!("unsupported PDDL feature: {what}"),
    )
}

fn expect_list<'a>(e: &'a Sexpr, what: &str) -> Result<&'a [Sexpr], PddlError> {
    e.list()
        .ok_or_else(|| PddlError::at(PddlErrorKind::Syntax, e, format!("expected a list for {what}")))
}

fn expect_atom<'a>(e: &'a Sexpr, what: &str) -> Result<&'a str, PddlError> {
    e.atom()
        .ok_or_else(|| PddlError::at(PddlErrorKind::Syntax, e, format!("expected {what}")))
}

/// Parses `a b - t c - u d` into typed names; untyped names get `object`.
fn typed_list(items: &[Sexpr]) -> Result<Vec<Typed>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let word = expect_atom(&items[i], "a name")?;
        if word == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| PddlError::at(PddlErrorKind::Syntax, &items[i], "\"-\" without a type"))?;
            if ty.head().is_some_and(|h| h.eq_ignore_ascii_case("either")) {
                return Err(unsupported(ty, "either types"));
            }
            let ty = expect_atom(ty, "a type name")?;
            if pending.is_empty() {
                return Err(PddlError::at(PddlErrorKind::Syntax, &items[i], "\"-\" without names"));
            }
            out.extend(pending.drain(..).map(|name| Typed {
                name,
                ty: ty.to_owned(),
            }));
            i += 2;
        } else {
            pending.push(word.to_owned());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|name| Typed {
        name,
        ty: "object".to_owned(),
    }));
    Ok(out)
}

fn atom_of(e: &Sexpr) -> Result<Atom, PddlError> {
    let items = expect_list(e, "a literal")?;
    let Some(head) = items.first() else {
        return Err(PddlError::at(PddlErrorKind::Syntax, e, "empty literal"));
    };
    let predicate = expect_atom(head, "a predicate name")?;
    if UNSUPPORTED_HEADS.iter().any(|h| h.eq_ignore_ascii_case(predicate)) {
        let what = if predicate.eq_ignore_ascii_case("not") {
            "negative literal here"
        } else {
            predicate
        };
        return Err(unsupported(e, what));
    }
    let args = items[1..]
        .iter()
        .map(|a| expect_atom(a, "a term").map(str::to_owned))
        .collect::<Result<_, _>>()?;
    Ok(Atom {
        predicate: predicate.to_owned(),
        args,
    })
}

/// Flattens `(and ...)` (or a single item) into its conjuncts.
fn conjuncts(e: &Sexpr) -> Result<Vec<&Sexpr>, PddlError> {
    let items = expect_list(e, "a condition")?;
    if items.first().is_some_and(|h| h.is_keyword("and")) {
        let mut out = Vec::new();
        for c in &items[1..] {
            out.extend(conjuncts(c)?);
        }
        Ok(out)
    } else if items.is_empty() {
        Ok(Vec::new())
    } else {
        Ok(alloc::vec![e])
    }
}

fn fluent_name(e: &Sexpr) -> Option<&str> {
    let items = e.list()?;
    (items.len() == 1).then(|| items[0].atom()).flatten()
}

fn number(e: &Sexpr, what: &str) -> Result<u64, PddlError> {
    let text = expect_atom(e, what)?;
    text.parse::<u64>().map_err(|_| {
        PddlError::at(
            PddlErrorKind::Invalid,
            e,
            format!("{what} must be a non-negative integer, found {text}"),
        )
    })
}

/// `(<= (+ (total-cost) C) (budget-limit))` -> `C`.
fn guard_of(e: &Sexpr) -> Result<u64, PddlError> {
    let items = e.list().unwrap_or(&[]);
    let shape = || {
        unsupported(
            e,
            "numeric condition other than (<= (+ (total-cost) C) (budget-limit))",
        )
    };
    if items.len() != 3 || fluent_name(&items[2]) != Some(BUDGET_FLUENT) {
        return Err(shape());
    }
    let sum = items[1].list().ok_or_else(shape)?;
    if sum.len() != 3 || !sum[0].is_keyword("+") || fluent_name(&sum[1]) != Some(COST_FLUENT) {
        return Err(shape());
    }
    number(&sum[2], "guard cost")
}

fn section<'a>(items: &'a [Sexpr], key: &str) -> Option<&'a Sexpr> {
    items.iter().find(|e| e.head().is_some_and(|h| h.eq_ignore_ascii_case(key)))
}

impl Domain {
    pub fn parse(source: &str) -> Result<Domain, PddlError> {
        let root = sexpr::parse(source)?;
        let items = expect_list(&root, "the domain")?;
        if !items.first().is_some_and(|h| h.is_keyword("define")) {
            return Err(PddlError::at(PddlErrorKind::Syntax, &root, "expected (define (domain ...) ...)"));
        }
        let header = items
            .get(1)
            .and_then(|h| h.list())
            .filter(|h| h.len() == 2 && h[0].is_keyword("domain"))
            .ok_or_else(|| PddlError::at(PddlErrorKind::Syntax, &root, "expected (domain NAME)"))?;
        let name = expect_atom(&header[1], "a domain name")?.to_owned();
        let mut domain = Domain {
            name,
            requirements: Vec::new(),
            types: Vec::new(),
            predicates: Vec::new(),
            functions: Vec::new(),
            actions: Vec::new(),
        };
        for part in &items[2..] {
            let list = expect_list(part, "a domain section")?;
            let head = list.first().and_then(|h| h.atom()).unwrap_or("");
            match head.to_ascii_lowercase().as_str() {
                ":requirements" => {
                    for r in &list[1..] {
                        let r = expect_atom(r, "a requirement")?;
                        if !SUPPORTED_REQUIREMENTS.iter().any(|s| s.eq_ignore_ascii_case(r)) {
                            return Err(unsupported(part, &format!("requirement {r}")));
                        }
                        domain.requirements.push(r.to_owned());
                    }
                }
                ":types" => domain.types = typed_list(&list[1..])?,
                ":predicates" => {
                    for p in &list[1..] {
                        let pl = expect_list(p, "a predicate declaration")?;
                        let Some(first) = pl.first() else {
                            return Err(PddlError::at(PddlErrorKind::Syntax, p, "empty predicate declaration"));
                        };
                        domain.predicates.push(PredicateSchema {
                            name: expect_atom(first, "a predicate name")?.to_owned(),
                            params: typed_list(&pl[1..])?,
                        });
                    }
                }
                ":functions" => {
                    for f in &list[1..] {
                        let name = fluent_name(f).ok_or_else(|| {
                            unsupported(f, "functions with parameters")
                        })?;
                        if name != COST_FLUENT && name != BUDGET_FLUENT {
                            return Err(unsupported(f, &format!("numeric fluent {name}")));
                        }
                        domain.functions.push(name.to_owned());
                    }
                }
                ":action" => domain.actions.push(parse_action(part, list)?),
                ":constants" => return Err(unsupported(part, "domain constants")),
                other => return Err(unsupported(part, &format!("section {other}"))),
            }
        }
        domain.check()?;
        Ok(domain)
    }

    pub fn type_declared(&self, ty: &str) -> bool {
        ty == "object" || self.types.iter().any(|t| t.name == ty)
    }

    /// Whether `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        for _ in 0..=self.types.len() {
            if cur == ancestor {
                return true;
            }
            match self.types.iter().find(|t| t.name == cur) {
                Some(t) => cur = &t.ty,
                None => return ancestor == "object",
            }
        }
        false
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    fn check(&self) -> Result<(), PddlError> {
        let invalid = |m: String| PddlError::new(PddlErrorKind::Invalid, None, m);
        let undeclared = |m: String| PddlError::new(PddlErrorKind::Undeclared, None, m);
        for t in &self.types {
            if !self.type_declared(&t.ty) {
                return Err(undeclared(format!("type {} has undeclared parent {}", t.name, t.ty)));
            }
        }
        for (i, p) in self.predicates.iter().enumerate() {
            if self.predicates[..i].iter().any(|q| q.name == p.name) {
                return Err(invalid(format!("predicate {} declared twice", p.name)));
            }
            for param in &p.params {
                if !self.type_declared(&param.ty) {
                    return Err(undeclared(format!("predicate {} uses undeclared type {}", p.name, param.ty)));
                }
            }
        }
        for (i, a) in self.actions.iter().enumerate() {
            if self.actions[..i].iter().any(|b| b.name == a.name) {
                return Err(invalid(format!("action {} declared twice", a.name)));
            }
            for param in &a.parameters {
                if !param.name.starts_with('?') {
                    return Err(invalid(format!("action {} parameter {} must start with ?", a.name, param.name)));
                }
                if !self.type_declared(&param.ty) {
                    return Err(undeclared(format!("action {} uses undeclared type {}", a.name, param.ty)));
                }
            }
            let lists = [
                ("precondition", &a.preconditions),
                ("add effect", &a.add),
                ("delete effect", &a.delete),
            ];
            for (role, atoms) in lists {
                for atom in atoms.iter() {
                    let Some(schema) = self.predicate(&atom.predicate) else {
                        return Err(undeclared(format!(
                            "action {} {role} uses undeclared predicate {}",
                            a.name, atom.predicate
                        )));
                    };
                    if schema.params.len() != atom.args.len() {
                        return Err(invalid(format!(
                            "action {}: {} takes {} arguments, found {}",
                            a.name,
                            atom.predicate,
                            schema.params.len(),
                            atom.args.len()
                        )));
                    }
                    for (arg, want) in atom.args.iter().zip(&schema.params) {
                        let Some(var) = a.parameters.iter().find(|p| p.name == *arg) else {
                            return Err(undeclared(format!(
                                "action {} uses {arg}, which is not one of its parameters",
                                a.name
                            )));
                        };
                        if !self.is_subtype(&var.ty, &want.ty) {
                            return Err(invalid(format!(
                                "action {}: {arg} - {} cannot fill a {} slot of {}",
                                a.name, var.ty, want.ty, atom.predicate
                            )));
                        }
                    }
                }
            }
            if let Some(atom) = a.add.iter().find(|x| a.delete.contains(x)) {
                return Err(invalid(format!("action {} both adds and deletes {atom}", a.name)));
            }
            if a.cost > 0 && !self.functions.iter().any(|f| f == COST_FLUENT) {
                return Err(undeclared(format!("action {} increases undeclared fluent {COST_FLUENT}", a.name)));
            }
            if a.guard.is_some() && !self.functions.iter().any(|f| f == BUDGET_FLUENT) {
                return Err(undeclared(format!("action {} guards on undeclared fluent {BUDGET_FLUENT}", a.name)));
            }
            match a.guard {
                None if a.cost > 0 => {
                    return Err(invalid(format!(
                        "action {} costs {} but has no budget guard",
                        a.name, a.cost
                    )))
                }
                Some(g) if g != a.cost => {
                    return Err(invalid(format!(
                        "action {} guards on {g} but costs {}",
                        a.name, a.cost
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Predicates no action adds or deletes.
    pub fn static_predicates(&self) -> Vec<&str> {
        self.predicates
            .iter()
            .map(|p| p.name.as_str())
            .filter(|name| {
                !self
                    .actions
                    .iter()
                    .any(|a| a.add.iter().chain(&a.delete).any(|x| x.predicate == *name))
            })
            .collect()
    }

    pub fn to_pddl(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "(define (domain {})", self.name);
        if !self.requirements.is_empty() {
            let _ = writeln!(out, "  (:requirements {})", self.requirements.join(" "));
        }
        if !self.types.is_empty() {
            let _ = writeln!(out, "  (:types {})", typed_text(&self.types));
        }
        out.push_str("  (:predicates");
        for p in &self.predicates {
            let _ = write!(out, "\n    ({}", p.name);
            if !p.params.is_empty() {
                let _ = write!(out, " {}", typed_text(&p.params));
            }
            out.push(')');
        }
        out.push_str(")\n");
        if !self.functions.is_empty() {
            out.push_str("  (:functions");
            for f in &self.functions {
                let _ = write!(out, " ({f})");
            }
            out.push_str(")\n");
        }
        for a in &self.actions {
            let _ = writeln!(out, "  (:action {}", a.name);
            let _ = writeln!(out, "    :parameters ({})", typed_text(&a.parameters));
            let mut pre: Vec<String> = a.preconditions.iter().map(|x| x.to_string()).collect();
            if let Some(g) = a.guard {
                pre.push(format!("(<= (+ ({COST_FLUENT}) {g}) ({BUDGET_FLUENT}))"));
            }
            let _ = writeln!(out, "    :precondition (and{})", spaced(&pre));
            let mut eff: Vec<String> = a.add.iter().map(|x| x.to_string()).collect();
            eff.extend(a.delete.iter().map(|x| format!("(not {x})")));
            if a.cost > 0 {
                eff.push(format!("(increase ({COST_FLUENT}) {})", a.cost));
            }
            let _ = writeln!(out, "    :effect (and{}))", spaced(&eff));
        }
        out.push_str(")\n");
        out
    }
}

fn spaced(items: &[String]) -> String {
    let mut s = String::new();
    for i in items {
        s.push(' ');
        s.push_str(i);
    }
    s
}

/// `a b - t c - u`, grouping consecutive names of one type.
fn typed_text(items: &[Typed]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < items.len() {
        let ty = &items[i].ty;
        let mut j = i;
        while j < items.len() && items[j].ty == *ty {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&items[j].name);
            j += 1;
        }
        let _ = write!(out, " - {ty}");
        i = j;
    }
    out
}

fn parse_action(part: &Sexpr, list: &[Sexpr]) -> Result<ActionSchema, PddlError> {
    let name = expect_atom(
        list.get(1)
            .ok_or_else(|| PddlError::at(PddlErrorKind::Syntax, part, "action without a name"))?,
        "an action name",
    )?
    .to_owned();
    let mut action = ActionSchema {
        name,
        parameters: Vec::new(),
        preconditions: Vec::new(),
        guard: None,
        add: Vec::new(),
        delete: Vec::new(),
        cost: 0,
    };
    let mut i = 2;
    while i < list.len() {
        let key = expect_atom(&list[i], "an action keyword")?.to_ascii_lowercase();
        let value = list
            .get(i + 1)
            .ok_or_else(|| PddlError::at(PddlErrorKind::Syntax, &list[i], format!("{key} without a value")))?;
        match key.as_str() {
            ":parameters" => action.parameters = typed_list(expect_list(value, "parameters")?)?,
            ":precondition" => {
                for c in conjuncts(value)? {
                    if c.head() == Some("<=") {
                        if action.guard.is_some() {
                            return Err(unsupported(c, "more than one numeric guard"));
                        }
                        action.guard = Some(guard_of(c)?);
                    } else {
                        action.preconditions.push(atom_of(c)?);
                    }
                }
            }
            ":effect" => {
                for c in conjuncts(value)? {
                    let items = expect_list(c, "an effect")?;
                    match c.head().map(|h| h.to_ascii_lowercase()).as_deref() {
                        Some("not") if items.len() == 2 => action.delete.push(atom_of(&items[1])?),
                        Some("increase") => {
                            if items.len() != 3 || fluent_name(&items[1]) != Some(COST_FLUENT) {
                                return Err(unsupported(c, "increase of anything but (total-cost) by a constant"));
                            }
                            action.cost = action
                                .cost
                                .checked_add(number(&items[2], "action cost")?)
                                .ok_or_else(|| PddlError::at(PddlErrorKind::Invalid, c, "action cost overflows"))?;
                        }
                        _ => action.add.push(atom_of(c)?),
                    }
                }
            }
            ":duration" | ":condition" => return Err(unsupported(&list[i], "durative actions")),
            other => return Err(unsupported(&list[i], &format!("action keyword {other}"))),
        }
        i += 2;
    }
    Ok(action)
}

impl Problem {
    pub fn parse(source: &str) -> Result<Problem, PddlError> {
        let root = sexpr::parse(source)?;
        let items = expect_list(&root, "the problem")?;
        if !items.first().is_some_and(|h| h.is_keyword("define")) {
            return Err(PddlError::at(PddlErrorKind::Syntax, &root, "expected (define (problem ...) ...)"));
        }
        let header = items
            .get(1)
            .and_then(|h| h.list())
            .filter(|h| h.len() == 2 && h[0].is_keyword("problem"))
            .ok_or_else(|| PddlError::at(PddlErrorKind::Syntax, &root, "expected (problem NAME)"))?;
        let mut problem = Problem {
            name: expect_atom(&header[1], "a problem name")?.to_owned(),
            domain: String::new(),
            objects: Vec::new(),
            init: Vec::new(),
            budget_limit: NO_BUDGET_SENTINEL,
            goals: Vec::new(),
        };
        let domain = section(&items[2..], ":domain")
            .ok_or_else(|| PddlError::at(PddlErrorKind::Syntax, &root, "missing (:domain NAME)"))?;
        problem.domain = expect_atom(
            domain.list().and_then(|l| l.get(1)).unwrap_or(domain),
            "a domain name",
        )?
        .to_owned();
        for part in &items[2..] {
            let list = expect_list(part, "a problem section")?;
            let head = list.first().and_then(|h| h.atom()).unwrap_or("");
            match head.to_ascii_lowercase().as_str() {
                ":domain" => {}
                ":objects" => problem.objects = typed_list(&list[1..])?,
                ":init" => {
                    for fact in &list[1..] {
                        if fact.head() == Some("=") {
                            let f = fact.list().unwrap_or(&[]);
                            if f.len() != 3 {
                                return Err(PddlError::at(PddlErrorKind::Syntax, fact, "expected (= (fluent) VALUE)"));
                            }
                            match fluent_name(&f[1]) {
                                Some(COST_FLUENT) => {
                                    if number(&f[2], "initial total-cost")? != 0 {
                                        return Err(PddlError::at(PddlErrorKind::Invalid, fact, "initial total-cost must be 0"));
                                    }
                                }
                                Some(BUDGET_FLUENT) => problem.budget_limit = number(&f[2], "budget-limit")?,
                                _ => return Err(unsupported(fact, "numeric fluent other than total-cost/budget-limit")),
                            }
                        } else {
                            problem.init.push(atom_of(fact)?);
                        }
                    }
                }
                ":goal" => {
                    let goal = list.get(1).ok_or_else(|| {
                        PddlError::at(PddlErrorKind::Syntax, part, "empty goal")
                    })?;
                    for c in conjuncts(goal)? {
                        problem.goals.push(atom_of(c)?);
                    }
                }
                ":metric" => {
                    let ok = list.len() == 3
                        && list[1].is_keyword("minimize")
                        && fluent_name(&list[2]) == Some(COST_FLUENT);
                    if !ok {
                        return Err(unsupported(part, "metric other than (minimize (total-cost))"));
                    }
                }
                other => return Err(unsupported(part, &format!("section {other}"))),
            }
        }
        Ok(problem)
    }

    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.ty.as_str())
    }

    /// Checks the problem against a domain: known domain name, declared
    /// types and predicates, correct arities and argument types.
    pub fn check(&self, domain: &Domain) -> Result<(), PddlError> {
        let invalid = |m: String| PddlError::new(PddlErrorKind::Invalid, None, m);
        let undeclared = |m: String| PddlError::new(PddlErrorKind::Undeclared, None, m);
        if !self.domain.eq_ignore_ascii_case(&domain.name) {
            return Err(invalid(format!(
                "problem is for domain {}, not {}",
                self.domain, domain.name
            )));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if !domain.type_declared(&o.ty) {
                return Err(undeclared(format!("object {} has undeclared type {}", o.name, o.ty)));
            }
            if self.objects[..i].iter().any(|p| p.name == o.name) {
                return Err(invalid(format!("object {} declared twice", o.name)));
            }
        }
        for (role, atoms) in [("initial state", &self.init), ("goal", &self.goals)] {
            for atom in atoms.iter() {
                let Some(schema) = domain.predicate(&atom.predicate) else {
                    return Err(undeclared(format!("{role} uses undeclared predicate {}", atom.predicate)));
                };
                if schema.params.len() != atom.args.len() {
                    return Err(invalid(format!("{role}: wrong arity in {atom}")));
                }
                for (arg, want) in atom.args.iter().zip(&schema.params) {
                    let Some(ty) = self.object_type(arg) else {
                        return Err(undeclared(format!("{role}: unknown object {arg} in {atom}")));
                    };
                    if !domain.is_subtype(ty, &want.ty) {
                        return Err(invalid(format!("{role}: {arg} - {ty} cannot fill a {} slot in {atom}", want.ty)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_pddl(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "(define (problem {})", self.name);
        let _ = writeln!(out, "  (:domain {})", self.domain);
        out.push_str("  (:objects");
        let mut i = 0;
        while i < self.objects.len() {
            let ty = &self.objects[i].ty;
            out.push_str("\n   ");
            while i < self.objects.len() && self.objects[i].ty == *ty {
                let _ = write!(out, " {}", self.objects[i].name);
                i += 1;
            }
            let _ = write!(out, " - {ty}");
        }
        out.push_str(")\n  (:init");
        for atom in &self.init {
            let _ = write!(out, "\n    {atom}");
        }
        let _ = write!(
            out,
            "\n    (= ({COST_FLUENT}) 0)\n    (= ({BUDGET_FLUENT}) {}))\n",
            self.budget_limit
        );
        out.push_str("  (:goal (and");
        for atom in &self.goals {
            let _ = write!(out, "\n    {atom}");
        }
        let _ = write!(out, "))\n  (:metric minimize ({COST_FLUENT})))\n");
        out
    }
}

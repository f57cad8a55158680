//! Wirings: the permutation of atomic ports denoted by the translation of a
//! purely linear term, their composition through feedback, and DOT export.
//!
//! Ports are named `<var>.<i>` with `i` the 1-based position in the
//! flattened product. Inputs are the atoms of `k : σ⁻` and of every `Δ⁺`
//! entry; outputs are the atoms of the result, labelled `res.<i>` for `σ⁺`
//! and `<var>.<i>` for each `Δ⁻` entry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::rc::Rc;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::Name;
use crate::letrec::{LtrTerm, LtrType, Pattern};
use crate::translate::TranslationOutput;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WiringError {
    #[error("type {0} has a function type among its atoms")]
    HigherOrderAtom(String),
    #[error("not a purely linear translation: {0}")]
    NotLinear(String),
    #[error("letrec declarations form a cycle through {0} without reaching an input")]
    CyclicWire(String),
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("path from input {0} never leaves the composite")]
    LiveLoop(String),
    #[error("not a bijection: {0}")]
    NotBijective(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Port {
    pub name: String,
    pub side: Side,
}

impl Port {
    pub fn input(name: impl Into<String>) -> Self {
        Port {
            name: name.into(),
            side: Side::Input,
        }
    }

    pub fn output(name: impl Into<String>) -> Self {
        Port {
            name: name.into(),
            side: Side::Output,
        }
    }
}

/// `map[i]` is the index in `outputs` reached from `inputs[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Wiring {
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub map: Vec<usize>,
}

impl Wiring {
    pub fn identity(names: &[&str]) -> Self {
        Wiring {
            inputs: names.iter().map(|n| Port::input(*n)).collect(),
            outputs: names.iter().map(|n| Port::output(*n)).collect(),
            map: (0..names.len()).collect(),
        }
    }

    /// `(input name, output name)` pairs sorted by input name; two wirings
    /// denote the same permutation iff these coincide.
    pub fn pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<_> = self
            .inputs
            .iter()
            .zip(&self.map)
            .map(|(i, &o)| (i.name.clone(), self.outputs[o].name.clone()))
            .collect();
        out.sort();
        out
    }

    pub fn same_permutation(&self, other: &Wiring) -> bool {
        self.pairs() == other.pairs()
    }

    /// For each output in order, the input wired to it.
    pub fn sources(&self) -> Vec<String> {
        let mut src = vec![String::new(); self.outputs.len()];
        for (i, &o) in self.map.iter().enumerate() {
            if o < src.len() {
                src[o] = self.inputs[i].name.clone();
            }
        }
        src
    }

    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Wiring {
        Wiring {
            inputs: self
                .inputs
                .iter()
                .map(|p| Port::input(f(&p.name)))
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|p| Port::output(f(&p.name)))
                .collect(),
            map: self.map.clone(),
        }
    }

    /// Total bijection with unique port names on each side.
    pub fn validate(&self) -> Result<(), WiringError> {
        if self.inputs.len() != self.outputs.len() || self.map.len() != self.inputs.len() {
            return Err(WiringError::NotBijective(format!(
                "{} inputs, {} outputs, {} map entries",
                self.inputs.len(),
                self.outputs.len(),
                self.map.len()
            )));
        }
        for (side, ports) in [("input", &self.inputs), ("output", &self.outputs)] {
            let mut seen = BTreeSet::new();
            for p in ports {
                if !seen.insert(&p.name) {
                    return Err(WiringError::NotBijective(format!(
                        "duplicate {side} port {}",
                        p.name
                    )));
                }
            }
        }
        let mut hit = vec![false; self.outputs.len()];
        for &o in &self.map {
            match hit.get_mut(o) {
                Some(h) if !*h => *h = true,
                Some(_) => {
                    return Err(WiringError::NotBijective(format!(
                        "output {} reached twice",
                        self.outputs[o].name
                    )))
                }
                None => {
                    return Err(WiringError::NotBijective(format!(
                        "output index {o} out of range"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Leaf enumeration of a canonical product; the unit contributes nothing.
pub fn atoms_of(t: &LtrType) -> Result<Vec<String>, WiringError> {
    t.components()
        .into_iter()
        .map(|c| match c {
            LtrType::Base(b) => Ok(b),
            _ => Err(WiringError::HigherOrderAtom(t.to_string())),
        })
        .collect()
}

fn port_names(var: &str, t: &LtrType) -> Result<Vec<String>, WiringError> {
    Ok((1..=atoms_of(t)?.len())
        .map(|i| format!("{var}.{i}"))
        .collect())
}

/// One step of a resolved path: a letrec-bound atom traversed between an
/// input and the output it reaches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Feedback {
    pub input: String,
    pub output: String,
    pub via: Vec<String>,
}

pub fn wiring_of(out: &TranslationOutput) -> Result<Wiring, WiringError> {
    wiring_of_term(out, &out.sugared).map(|(w, _)| w)
}

/// Reads the permutation off a letrec-free tuple normal form of `out`.
pub fn read_permutation(
    out: &TranslationOutput,
    normal_form: &LtrTerm,
) -> Result<Wiring, WiringError> {
    if normal_form.contains_letrec() {
        return Err(WiringError::NotLinear(
            "normal form still contains letrec".into(),
        ));
    }
    wiring_of_term(out, normal_form).map(|(w, _)| w)
}

/// Evaluates `term` (any term of the translation's type and context) on
/// input tokens and resolves letrec holes by path-following.
pub fn wiring_of_term(
    out: &TranslationOutput,
    term: &LtrTerm,
) -> Result<(Wiring, Vec<Feedback>), WiringError> {
    if let Some((x, _)) = out.gamma.first() {
        return Err(WiringError::NotLinear(format!(
            "non-linear variable {x} in context"
        )));
    }
    let mut inputs: Vec<Port> = port_names("k", &out.polar.neg)?
        .into_iter()
        .map(Port::input)
        .collect();
    let k_atoms = token_atoms(0, inputs.len());
    let mut env = Env::new();
    for (y, t) in &out.delta {
        let names = port_names(y.text(), t)?;
        env.insert(
            y.clone(),
            Value::Flat(token_atoms(inputs.len(), names.len())),
        );
        inputs.extend(names.into_iter().map(Port::input));
    }
    let mut outputs = port_names("res", &out.polar.pos)?;
    for (y, t) in &out.delta_negs {
        outputs.extend(port_names(y.text(), t)?);
    }

    let mut ev = Evaluator { holes: Vec::new() };
    let f = ev.eval(&env, term)?;
    let result = ev.apply(f, Value::Flat(k_atoms))?;
    let Value::Flat(atoms) = result else {
        return Err(WiringError::NotLinear(
            "translation returns a function".into(),
        ));
    };
    if atoms.len() != outputs.len() {
        return Err(WiringError::NotLinear(format!(
            "result has {} atoms, interface has {}",
            atoms.len(),
            outputs.len()
        )));
    }

    let mut map = vec![usize::MAX; inputs.len()];
    let mut feedback = Vec::new();
    for (o, atom) in atoms.iter().enumerate() {
        let (i, via) = ev.resolve(atom, inputs.len())?;
        if map[i] != usize::MAX {
            return Err(WiringError::NotLinear(format!(
                "input {} used twice",
                inputs[i].name
            )));
        }
        map[i] = o;
        if !via.is_empty() {
            feedback.push(Feedback {
                input: inputs[i].name.clone(),
                output: outputs[o].clone(),
                via,
            });
        }
    }
    if let Some(i) = map.iter().position(|&o| o == usize::MAX) {
        return Err(WiringError::NotLinear(format!(
            "input {} is discarded",
            inputs[i].name
        )));
    }
    let w = Wiring {
        inputs,
        outputs: outputs.into_iter().map(Port::output).collect(),
        map,
    };
    w.validate()?;
    Ok((w, feedback))
}

fn token_atoms(start: usize, n: usize) -> Vec<Atom> {
    (start..start + n).map(Atom::Token).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Atom {
    Token(usize),
    Hole(usize),
}

#[derive(Clone)]
enum Value {
    Flat(Vec<Atom>),
    Closure(Rc<Closure>),
}

struct Closure {
    pat: Pattern,
    body: LtrTerm,
    env: Env,
}

type Env = BTreeMap<Name, Value>;

struct Evaluator {
    /// Per hole: its label and, once its declaration is evaluated, its value.
    holes: Vec<(String, Option<Atom>)>,
}

impl Evaluator {
    fn eval(&mut self, env: &Env, t: &LtrTerm) -> Result<Value, WiringError> {
        match t {
            LtrTerm::Var { name } => env.get(name).cloned().ok_or_else(|| {
                WiringError::NotLinear(format!("unbound or non-linear variable {name}"))
            }),
            LtrTerm::Lam { pat, body } => Ok(Value::Closure(Rc::new(Closure {
                pat: pat.clone(),
                body: (**body).clone(),
                env: env.clone(),
            }))),
            LtrTerm::App { fun, arg } => {
                let f = self.eval(env, fun)?;
                let a = self.eval(env, arg)?;
                self.apply(f, a)
            }
            LtrTerm::Tuple { items } => {
                let mut vals = Vec::new();
                for i in items {
                    vals.push(self.eval(env, i)?);
                }
                if vals.len() == 1 {
                    return Ok(vals.pop().unwrap());
                }
                let mut flat = Vec::new();
                for v in vals {
                    match v {
                        Value::Flat(a) => flat.extend(a),
                        Value::Closure(_) => {
                            return Err(WiringError::NotLinear("function stored in a tuple".into()))
                        }
                    }
                }
                Ok(Value::Flat(flat))
            }
            LtrTerm::Proj { index, tuple } => match self.eval(env, tuple)? {
                Value::Flat(a) => a
                    .get(index - 1)
                    .cloned()
                    .map(|x| Value::Flat(vec![x]))
                    .ok_or_else(|| {
                        WiringError::NotLinear(format!("projection {index} out of range"))
                    }),
                Value::Closure(_) => Err(WiringError::NotLinear("projection of a function".into())),
            },
            LtrTerm::Let { pat, bound, body } => {
                let v = self.eval(env, bound)?;
                let mut inner = env.clone();
                bind(&mut inner, pat, v)?;
                self.eval(&inner, body)
            }
            LtrTerm::Letrec { decls, body } => {
                let mut inner = env.clone();
                let mut slots = Vec::new();
                for d in decls {
                    let ty = d.pat.ty();
                    if ty.contains_fun() {
                        return Err(WiringError::NotLinear("letrec declares a function".into()));
                    }
                    let first = self.holes.len();
                    for (x, t) in d.pat.vars() {
                        let n = atoms_of(&t)?.len();
                        let base = self.holes.len();
                        for i in 1..=n {
                            self.holes.push((format!("{x}.{i}"), None));
                        }
                        inner.insert(x, Value::Flat((base..base + n).map(Atom::Hole).collect()));
                    }
                    slots.push((first, self.holes.len()));
                }
                for (d, &(lo, hi)) in decls.iter().zip(&slots) {
                    let Value::Flat(atoms) = self.eval(&inner, &d.term)? else {
                        return Err(WiringError::NotLinear(
                            "letrec declaration is a function".into(),
                        ));
                    };
                    let mut targets = Vec::new();
                    pattern_slots(&d.pat, &mut (lo..hi), &mut targets)?;
                    if atoms.len() != targets.len() {
                        return Err(WiringError::NotLinear("declaration width mismatch".into()));
                    }
                    for (slot, a) in targets.into_iter().zip(atoms) {
                        if let Some(s) = slot {
                            self.holes[s].1 = Some(a);
                        }
                    }
                }
                self.eval(&inner, body)
            }
        }
    }

    fn apply(&mut self, f: Value, a: Value) -> Result<Value, WiringError> {
        let Value::Closure(c) = f else {
            return Err(WiringError::NotLinear(
                "application of a non-function".into(),
            ));
        };
        let mut env = c.env.clone();
        bind(&mut env, &c.pat, a)?;
        self.eval(&env, &c.body)
    }

    /// Follows holes until an input token; returns the hole labels passed.
    fn resolve(&self, atom: &Atom, ports: usize) -> Result<(usize, Vec<String>), WiringError> {
        let mut via = Vec::new();
        let mut at = atom.clone();
        let bound = ports * ports + self.holes.len() + 1;
        for _ in 0..bound {
            match at {
                Atom::Token(i) => return Ok((i, via)),
                Atom::Hole(h) => {
                    let (label, next) = &self.holes[h];
                    via.insert(0, label.clone());
                    at = next
                        .clone()
                        .ok_or_else(|| WiringError::CyclicWire(label.clone()))?;
                }
            }
        }
        Err(WiringError::CyclicWire(
            via.last().cloned().unwrap_or_default(),
        ))
    }
}

/// Hole indices a declaration pattern fills, `None` for wildcard atoms.
fn pattern_slots(
    p: &Pattern,
    holes: &mut std::ops::Range<usize>,
    out: &mut Vec<Option<usize>>,
) -> Result<(), WiringError> {
    match p {
        Pattern::Var { ty, .. } => {
            for _ in 0..atoms_of(ty)?.len() {
                out.push(holes.next());
            }
        }
        Pattern::Wild { ty } => out.extend(std::iter::repeat_n(None, atoms_of(ty)?.len())),
        Pattern::Tuple { items } => {
            for i in items {
                pattern_slots(i, holes, out)?;
            }
        }
    }
    Ok(())
}

fn bind(env: &mut Env, p: &Pattern, v: Value) -> Result<(), WiringError> {
    match (p, v) {
        (Pattern::Var { name, .. }, v) => {
            env.insert(name.clone(), v);
            Ok(())
        }
        (Pattern::Wild { .. }, _) => Ok(()),
        (Pattern::Tuple { items }, Value::Flat(atoms)) => {
            let mut rest = atoms.as_slice();
            for i in items {
                let n = atoms_of(&i.ty())?.len();
                if n > rest.len() {
                    return Err(WiringError::NotLinear("pattern wider than value".into()));
                }
                bind(env, i, Value::Flat(rest[..n].to_vec()))?;
                rest = &rest[n..];
            }
            if rest.is_empty() {
                Ok(())
            } else {
                Err(WiringError::NotLinear("value wider than pattern".into()))
            }
        }
        (Pattern::Tuple { .. }, Value::Closure(_)) => Err(WiringError::NotLinear(
            "tuple pattern against a function".into(),
        )),
    }
}

/// Which ports of two wirings are joined: `forward` pairs an output of the
/// first with an input of the second, `backward` an output of the second
/// with an input of the first (the feedback).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interface {
    pub forward: Vec<(String, String)>,
    pub backward: Vec<(String, String)>,
}

/// Composite by path-following: joined ports become internal, every other
/// port stays external (inputs of `f` then `g`, outputs of `g` then `f`).
pub fn compose_wirings(
    f: &Wiring,
    g: &Wiring,
    interface: &Interface,
) -> Result<Wiring, WiringError> {
    f.validate()?;
    g.validate()?;
    let index = |ports: &[Port], name: &str, what: &str| {
        ports
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| WiringError::InterfaceMismatch(format!("no {what} port {name}")))
    };
    // Joined output -> (which wiring, input index).
    let mut f_out_to_g_in = BTreeMap::new();
    let mut g_out_to_f_in = BTreeMap::new();
    let mut f_in_internal = BTreeSet::new();
    let mut g_in_internal = BTreeSet::new();
    for (o, i) in &interface.forward {
        let (o, i) = (
            index(&f.outputs, o, "output")?,
            index(&g.inputs, i, "input")?,
        );
        if f_out_to_g_in.insert(o, i).is_some() || !g_in_internal.insert(i) {
            return Err(WiringError::InterfaceMismatch("port joined twice".into()));
        }
    }
    for (o, i) in &interface.backward {
        let (o, i) = (
            index(&g.outputs, o, "output")?,
            index(&f.inputs, i, "input")?,
        );
        if g_out_to_f_in.insert(o, i).is_some() || !f_in_internal.insert(i) {
            return Err(WiringError::InterfaceMismatch("port joined twice".into()));
        }
    }

    let mut inputs = Vec::new();
    let mut starts = Vec::new();
    for (i, p) in f
        .inputs
        .iter()
        .enumerate()
        .filter(|(i, _)| !f_in_internal.contains(i))
    {
        inputs.push(p.clone());
        starts.push((false, i));
    }
    for (i, p) in g
        .inputs
        .iter()
        .enumerate()
        .filter(|(i, _)| !g_in_internal.contains(i))
    {
        inputs.push(p.clone());
        starts.push((true, i));
    }
    let mut outputs = Vec::new();
    let mut out_index = BTreeMap::new();
    for (o, p) in g
        .outputs
        .iter()
        .enumerate()
        .filter(|(o, _)| !g_out_to_f_in.contains_key(o))
    {
        out_index.insert((true, o), outputs.len());
        outputs.push(p.clone());
    }
    for (o, p) in f
        .outputs
        .iter()
        .enumerate()
        .filter(|(o, _)| !f_out_to_g_in.contains_key(o))
    {
        out_index.insert((false, o), outputs.len());
        outputs.push(p.clone());
    }
    if inputs.len() != outputs.len() {
        return Err(WiringError::InterfaceMismatch(format!(
            "{} external inputs against {} external outputs",
            inputs.len(),
            outputs.len()
        )));
    }

    let limit = f.inputs.len() + g.inputs.len() + 1;
    let mut map = Vec::new();
    for (start, &(in_g, i)) in inputs.iter().zip(&starts) {
        let (mut in_g, mut i) = (in_g, i);
        let mut steps = 0;
        let target = loop {
            let o = if in_g { g.map[i] } else { f.map[i] };
            let next = if in_g {
                g_out_to_f_in.get(&o)
            } else {
                f_out_to_g_in.get(&o)
            };
            match next {
                Some(&j) => {
                    in_g = !in_g;
                    i = j;
                }
                None => break out_index[&(in_g, o)],
            }
            steps += 1;
            if steps > limit {
                return Err(WiringError::LiveLoop(start.name.clone()));
            }
        };
        map.push(target);
    }
    let w = Wiring {
        inputs,
        outputs,
        map,
    };
    w.validate()?;
    Ok(w)
}

/// The wiring of `M N` from those of `M` and `N`: the `σ⁺` outputs of `N`
/// feed the argument inputs of `M` and the `σ⁻` outputs of `M` are fed back
/// into `N`'s continuation.
pub fn compose_application(m: &Wiring, n: &Wiring) -> Result<Wiring, WiringError> {
    let count = |w: &Wiring, side: Side, var: &str| {
        let ports = if side == Side::Input {
            &w.inputs
        } else {
            &w.outputs
        };
        ports
            .iter()
            .filter(|p| p.name.split_once('.').map(|(v, _)| v) == Some(var))
            .count()
    };
    let sigma_pos = count(n, Side::Output, "res");
    let sigma_neg = count(n, Side::Input, "k");
    let tau_pos = count(m, Side::Output, "res").saturating_sub(sigma_neg);
    let mut interface = Interface::default();
    for i in 1..=sigma_pos {
        interface
            .forward
            .push((format!("N:res.{i}"), format!("M:k.{i}")));
    }
    for j in 1..=sigma_neg {
        interface
            .backward
            .push((format!("M:res.{}", tau_pos + j), format!("N:k.{j}")));
    }
    let composite = compose_wirings(
        &n.renamed(|p| format!("N:{p}")),
        &m.renamed(|p| format!("M:{p}")),
        &interface,
    )?;
    let strip = |p: &str| {
        let p = p.split_once(':').map_or(p, |(_, rest)| rest);
        match p.strip_prefix("k.").and_then(|i| i.parse::<usize>().ok()) {
            Some(i) => format!("k.{}", i - sigma_pos),
            None => p.to_string(),
        }
    };
    Ok(composite.renamed(strip))
}

/// Renders a wiring as a left-to-right DOT digraph; `feedback` paths are
/// drawn through intermediate nodes with dashed back-edges.
pub fn to_dot(w: &Wiring, feedback: &[Feedback]) -> String {
    let mut s = String::from("digraph wiring {\n  rankdir=LR;\n  node [shape=box];\n");
    let _ = writeln!(s, "  {{ rank=source;");
    for p in &w.inputs {
        let _ = writeln!(s, "    \"in:{0}\" [label=\"{0}\"];", p.name);
    }
    let _ = writeln!(s, "  }}\n  {{ rank=sink;");
    for p in &w.outputs {
        let _ = writeln!(s, "    \"out:{0}\" [label=\"{0}\"];", p.name);
    }
    s.push_str("  }\n");
    let via: BTreeMap<&str, &Feedback> = feedback.iter().map(|f| (f.input.as_str(), f)).collect();
    let mut hole_nodes = BTreeSet::new();
    for (p, &o) in w.inputs.iter().zip(&w.map) {
        let out = format!("out:{}", w.outputs[o].name);
        match via.get(p.name.as_str()) {
            Some(fb) if fb.output == w.outputs[o].name => {
                let mut prev = format!("in:{}", p.name);
                for h in &fb.via {
                    let node = format!("via:{h}");
                    if hole_nodes.insert(node.clone()) {
                        let _ = writeln!(s, "  \"{node}\" [shape=point, xlabel=\"{h}\"];");
                    }
                    let _ = writeln!(
                        s,
                        "  \"{prev}\" -> \"{node}\" [style=dashed, constraint=false];"
                    );
                    prev = node;
                }
                let _ = writeln!(s, "  \"{prev}\" -> \"{out}\";");
            }
            _ => {
                let _ = writeln!(s, "  \"in:{}\" -> \"{out}\";", p.name);
            }
        }
    }
    s.push_str("}\n");
    s
}

//! Explicit-stack evaluator.
//!
//! Evaluation never recurses on the Rust stack: continuations live in a
//! heap-allocated frame stack, so program recursion depth is bounded only by
//! fuel. Every node visit and every primitive application costs at least one
//! unit of fuel; primitives that build or take apart large words are charged
//! an extra unit per [`BYTES_PER_FUEL`] bytes so that memory growth is also
//! metered.

use std::collections::HashMap;
use std::rc::Rc;

use dashu_int::UBig;
use sha2::{Digest, Sha256};

use super::syntax::{self, Expr, Name, Node, Prim};
use super::EvalOutcome;
use crate::codec::{self, Word};

pub const BYTES_PER_FUEL: usize = 64;

type Val = Rc<[u8]>;

#[derive(Debug)]
enum Binding {
    Var(Name, Val),
    Fun(Name, Rc<[Name]>, Node),
}

#[derive(Debug)]
struct Scope {
    binding: Binding,
    next: Env,
}

type Env = Option<Rc<Scope>>;

fn bind(env: &Env, binding: Binding) -> Env {
    Some(Rc::new(Scope {
        binding,
        next: env.clone(),
    }))
}

fn lookup_var(env: &Env, name: &str) -> Option<Val> {
    let mut cur = env;
    while let Some(scope) = cur {
        if let Binding::Var(n, v) = &scope.binding {
            if n.as_ref() == name {
                return Some(v.clone());
            }
        }
        cur = &scope.next;
    }
    None
}

/// Returns the function's parameters, body, and the scope it closes over
/// (the binding node itself, so the function can call itself).
fn lookup_fun(env: &Env, name: &str) -> Option<(Rc<[Name]>, Node, Env)> {
    let mut cur = env;
    while let Some(scope) = cur {
        if let Binding::Fun(n, params, body) = &scope.binding {
            if n.as_ref() == name {
                return Some((params.clone(), body.clone(), cur.clone()));
            }
        }
        cur = &scope.next;
    }
    None
}

enum Callee {
    Prim(Prim),
    Fun(Name),
}

enum Frame {
    Let {
        name: Name,
        body: Node,
        env: Env,
    },
    If {
        then: Node,
        other: Node,
        env: Env,
    },
    Seq {
        items: Rc<[Node]>,
        next: usize,
        env: Env,
    },
    Args {
        callee: Callee,
        args: Rc<[Node]>,
        done: Vec<Val>,
        env: Env,
    },
}

enum Stop {
    Fault(String),
    OutOfFuel,
}

enum Step {
    Eval(Node, Env),
    Return(Val),
}

pub(crate) struct Machine {
    budget: u64,
    used: u64,
    unpaired: HashMap<Val, (Val, Val)>,
    tuples: HashMap<Val, Rc<[Val]>>,
    parsed: HashMap<Val, Result<Node, String>>,
}


/// Upper bound on the byte length of the encoded tuple of `items`.
fn encoded_size_bound(items: &[Val]) -> usize {
    let step = |a: usize, b: usize| a.max(b).saturating_mul(2).saturating_add(2);
    let payload = match items.split_last() {
        None => 0,
        Some((last, init)) => init.iter().rev().fold(last.len(), |acc, i| step(acc, i.len())),
    };
    step(payload, 8)
}
fn truth(b: bool) -> Val {
    if b {
        Rc::from(Word::from_nat(1).into_bytes())
    } else {
        Rc::from(Vec::new())
    }
}

fn small_nat(v: &[u8]) -> Option<usize> {
    usize::try_from(&codec::word_to_nat(v)).ok()
}

fn nat_val(n: &UBig) -> Val {
    Rc::from(codec::nat_to_word(n).into_bytes())
}

impl Machine {
    pub(crate) fn new(budget: u64) -> Self {
        Machine {
            budget,
            used: 0,
            unpaired: HashMap::new(),
            tuples: HashMap::new(),
            parsed: HashMap::new(),
        }
    }

    fn charge(&mut self, units: u64) -> Result<(), Stop> {
        self.used = self.used.saturating_add(units);
        if self.used > self.budget {
            self.used = self.budget;
            Err(Stop::OutOfFuel)
        } else {
            Ok(())
        }
    }

    fn exhaust(&mut self) -> Stop {
        self.used = self.budget;
        Stop::OutOfFuel
    }

    fn charge_bytes(&mut self, n: usize) -> Result<(), Stop> {
        self.charge((n / BYTES_PER_FUEL) as u64)
    }

    pub(crate) fn run(mut self, program: &syntax::Program, input: &[u8]) -> EvalOutcome {
        let env = bind(&None, Binding::Var(Rc::from("in"), Rc::from(input)));
        match self.eval(program.root().clone(), env) {
            Ok(v) => EvalOutcome::Value(Word::from(v.as_ref())),
            Err(Stop::Fault(reason)) => EvalOutcome::Undefined(reason),
            Err(Stop::OutOfFuel) => EvalOutcome::OutOfFuel(self.used),
        }
    }

    fn eval(&mut self, root: Node, env: Env) -> Result<Val, Stop> {
        let mut stack: Vec<Frame> = Vec::new();
        let mut step = Step::Eval(root, env);
        loop {
            step = match step {
                Step::Eval(node, env) => {
                    self.charge(1)?;
                    self.enter(node, env, &mut stack)?
                }
                Step::Return(val) => match stack.pop() {
                    None => return Ok(val),
                    Some(frame) => self.resume(frame, val, &mut stack)?,
                },
            }
        }
    }

    fn enter(&mut self, node: Node, env: Env, stack: &mut Vec<Frame>) -> Result<Step, Stop> {
        Ok(match node.as_ref() {
            Expr::Lit(bytes) => Step::Return(bytes.clone()),
            Expr::Var(name) => match lookup_var(&env, name) {
                Some(v) => Step::Return(v),
                None => return Err(Stop::Fault(format!("unbound variable `{name}`"))),
            },
            Expr::Let(name, value, body) => {
                stack.push(Frame::Let {
                    name: name.clone(),
                    body: body.clone(),
                    env: env.clone(),
                });
                Step::Eval(value.clone(), env)
            }
            Expr::If(c, t, e) => {
                stack.push(Frame::If {
                    then: t.clone(),
                    other: e.clone(),
                    env: env.clone(),
                });
                Step::Eval(c.clone(), env)
            }
            Expr::Seq(items) => {
                if items.len() > 1 {
                    stack.push(Frame::Seq {
                        items: items.clone(),
                        next: 1,
                        env: env.clone(),
                    });
                }
                Step::Eval(items[0].clone(), env)
            }
            Expr::Letrec {
                name,
                params,
                body,
                rest,
            } => {
                let env = bind(&env, Binding::Fun(name.clone(), params.clone(), body.clone()));
                Step::Eval(rest.clone(), env)
            }
            Expr::Prim(prim, args) => self.start_call(Callee::Prim(*prim), args, env, stack)?,
            Expr::Call(name, args) => {
                self.start_call(Callee::Fun(name.clone()), args, env, stack)?
            }
        })
    }

    fn start_call(
        &mut self,
        callee: Callee,
        args: &Rc<[Node]>,
        env: Env,
        stack: &mut Vec<Frame>,
    ) -> Result<Step, Stop> {
        if args.is_empty() {
            return self.apply(callee, Vec::new(), &env);
        }
        let first = args[0].clone();
        stack.push(Frame::Args {
            callee,
            args: args.clone(),
            done: Vec::with_capacity(args.len()),
            env: env.clone(),
        });
        Ok(Step::Eval(first, env))
    }

    fn resume(&mut self, frame: Frame, val: Val, stack: &mut Vec<Frame>) -> Result<Step, Stop> {
        Ok(match frame {
            Frame::Let { name, body, env } => Step::Eval(body, bind(&env, Binding::Var(name, val))),
            Frame::If { then, other, env } => {
                if val.is_empty() {
                    Step::Eval(other, env)
                } else {
                    Step::Eval(then, env)
                }
            }
            Frame::Seq { items, next, env } => {
                let node = items[next].clone();
                if next + 1 < items.len() {
                    stack.push(Frame::Seq {
                        items,
                        next: next + 1,
                        env: env.clone(),
                    });
                }
                Step::Eval(node, env)
            }
            Frame::Args {
                callee,
                args,
                mut done,
                env,
            } => {
                done.push(val);
                if done.len() == args.len() {
                    self.apply(callee, done, &env)?
                } else {
                    let node = args[done.len()].clone();
                    stack.push(Frame::Args {
                        callee,
                        args,
                        done,
                        env: env.clone(),
                    });
                    Step::Eval(node, env)
                }
            }
        })
    }

    fn apply(&mut self, callee: Callee, args: Vec<Val>, env: &Env) -> Result<Step, Stop> {
        match callee {
            Callee::Fun(name) => {
                let Some((params, body, closure)) = lookup_fun(env, &name) else {
                    return Err(Stop::Fault(format!("unbound function `{name}`")));
                };
                if params.len() != args.len() {
                    return Err(Stop::Fault(format!(
                        "`{name}` takes {} argument(s), got {}",
                        params.len(),
                        args.len()
                    )));
                }
                let call_env = params
                    .iter()
                    .zip(args)
                    .fold(closure, |e, (p, a)| bind(&e, Binding::Var(p.clone(), a)));
                Ok(Step::Eval(body, call_env))
            }
            Callee::Prim(Prim::Exec) => {
                self.charge(1)?;
                let mut args = args.into_iter();
                let (code, input) = (args.next().unwrap(), args.next().unwrap());
                let root = self.parse_cached(code)?;
                let env = bind(&None, Binding::Var(Rc::from("in"), input));
                Ok(Step::Eval(root, env))
            }
            Callee::Prim(prim) => {
                self.charge(1)?;
                self.prim(prim, &args).map(Step::Return)
            }
        }
    }

    fn parse_cached(&mut self, code: Val) -> Result<Node, Stop> {
        if let Some(hit) = self.parsed.get(&code) {
            return hit.clone().map_err(Stop::Fault);
        }
        self.charge_bytes(code.len())?;
        let parsed = syntax::parse(&code)
            .map(|p| p.root().clone())
            .map_err(|e| format!("exec of a non-program: {e}"));
        self.parsed.insert(code, parsed.clone());
        parsed.map_err(Stop::Fault)
    }

    fn unpair(&mut self, w: &Val) -> Result<(Val, Val), Stop> {
        if let Some(hit) = self.unpaired.get(w) {
            return Ok(hit.clone());
        }
        self.charge_bytes(w.len())?;
        let (a, b) = codec::unpair_bytes(w);
        let out: (Val, Val) = (Rc::from(a), Rc::from(b));
        self.unpaired.insert(w.clone(), out.clone());
        Ok(out)
    }

    fn tuple(&mut self, w: &Val) -> Result<Rc<[Val]>, Stop> {
        if let Some(hit) = self.tuples.get(w) {
            return Ok(hit.clone());
        }
        self.charge_bytes(w.len())?;
        let (header, _) = codec::unpair_bytes(w);
        if codec::word_to_nat(&header) > UBig::from(self.budget - self.used) {
            return Err(self.exhaust());
        }
        let items = codec::decode_tuple_bytes(w).map_err(|e| Stop::Fault(e.to_string()))?;
        self.charge(items.len() as u64)?;
        let items: Rc<[Val]> = items.into_iter().map(Rc::from).collect();
        self.tuples.insert(w.clone(), items.clone());
        Ok(items)
    }

    fn encode(&mut self, items: &[Val]) -> Result<Val, Stop> {
        let total: usize = items.iter().map(|i| i.len()).sum();
        self.charge_bytes(total.saturating_mul(2))?;
        // Each nesting level can double the size, so a long tuple of tiny
        // items is huge. Refuse before allocating if the budget cannot cover it.
        let bound = encoded_size_bound(items);
        if (bound / BYTES_PER_FUEL) as u64 > self.budget - self.used {
            return Err(self.exhaust());
        }
        let out: Val = Rc::from(codec::encode_tuple_bytes(items));
        self.charge_bytes(out.len())?;
        self.tuples.insert(out.clone(), items.into());
        Ok(out)
    }

    fn index(&self, items: &[Val], i: &[u8]) -> Result<usize, Stop> {
        small_nat(i)
            .filter(|&i| i < items.len())
            .ok_or_else(|| Stop::Fault(format!("tuple index out of range (arity {})", items.len())))
    }

    fn prim(&mut self, prim: Prim, args: &[Val]) -> Result<Val, Stop> {
        let out: Val = match prim {
            Prim::Pair => {
                self.charge_bytes((args[0].len() + args[1].len()).saturating_mul(2))?;
                let out: Val = Rc::from(codec::pair_bytes(&args[0], &args[1]));
                self.unpaired
                    .insert(out.clone(), (args[0].clone(), args[1].clone()));
                out
            }
            Prim::Fst => self.unpair(&args[0])?.0,
            Prim::Snd => self.unpair(&args[0])?.1,
            Prim::Tuple => self.encode(args)?,
            Prim::Arity => {
                let n = self.tuple(&args[0])?.len();
                nat_val(&UBig::from(n))
            }
            Prim::Nth => {
                let items = self.tuple(&args[0])?;
                let i = self.index(&items, &args[1])?;
                items[i].clone()
            }
            Prim::Replace => {
                let items = self.tuple(&args[0])?;
                let i = self.index(&items, &args[1])?;
                let mut items = items.to_vec();
                items[i] = args[2].clone();
                self.encode(&items)?
            }
            Prim::Add => {
                let mut items = self.tuple(&args[0])?.to_vec();
                items.push(args[1].clone());
                self.encode(&items)?
            }
            Prim::Concat => {
                let total: usize = args.iter().map(|a| a.len()).sum();
                self.charge_bytes(total)?;
                let mut out = Vec::with_capacity(total);
                for a in args {
                    out.extend_from_slice(a);
                }
                Rc::from(out)
            }
            Prim::Eq => truth(args[0] == args[1]),
            Prim::Not => truth(args[0].is_empty()),
            Prim::Quote => {
                self.charge_bytes(args[0].len())?;
                Rc::from(syntax::lit(&args[0]))
            }
            Prim::ReadLit => {
                let (body, rest) = syntax::read_literal(&args[0])
                    .ok_or_else(|| Stop::Fault("read-lit: no literal at start of word".into()))?;
                self.charge_bytes(args[0].len())?;
                Rc::from(codec::pair_bytes(body, rest))
            }
            Prim::StartsWith => truth(args[0].starts_with(&args[1])),
            Prim::Drop => {
                let n = small_nat(&args[1]).unwrap_or(usize::MAX).min(args[0].len());
                self.charge_bytes(args[0].len() - n)?;
                Rc::from(&args[0][n..])
            }
            Prim::Take => {
                let n = small_nat(&args[1]).unwrap_or(usize::MAX).min(args[0].len());
                self.charge_bytes(n)?;
                Rc::from(&args[0][..n])
            }
            Prim::Len => nat_val(&UBig::from(args[0].len())),
            Prim::Inc => nat_val(&(codec::word_to_nat(&args[0]) + UBig::ONE)),
            Prim::Dec => {
                let n = codec::word_to_nat(&args[0]);
                if n == UBig::ZERO {
                    return Err(Stop::Fault("dec of zero".into()));
                }
                nat_val(&(n - UBig::ONE))
            }
            Prim::Lt => truth(codec::word_to_nat(&args[0]) < codec::word_to_nat(&args[1])),
            Prim::Digest => {
                self.charge_bytes(args[0].len())?;
                Rc::from(Sha256::digest(&args[0]).to_vec())
            }
            Prim::Nop => Rc::from(Vec::new()),
            Prim::Exec => unreachable!("exec is dispatched in apply"),
        };
        Ok(out)
    }
}

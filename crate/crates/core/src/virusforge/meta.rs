//! Rust-level infection semantics, written independently of the toy bodies.

use crate::codec::{unpair, Word};
use crate::envmodel::Env;
use crate::interp::{lit, SMN_OPEN};
use crate::recursion::PHI_OPEN;

use super::code::{self, LOC_OPEN, STUB_OPEN};
use super::{Class, Filter, InfectionCondition, Part, TargetKind, DOC_MARKER, SRC_MARKER};

pub(crate) struct Ctx {
    /// The word performing the infection.
    pub actor: Word,
    /// Precomputed infected form, for classes whose image ignores the host.
    pub img: Option<Word>,
}

fn infected(class: Class, ctx: &Ctx, env: &Env, j: &Word) -> bool {
    let wrapped = code::wrapped_prefix(&ctx.actor);
    match class {
        Class::Overwriter | Class::Duplicator => *j == ctx.actor,
        Class::EctoSymbiote => j.starts_with(&wrapped),
        Class::Document => {
            let (script, _) = unpair(&j[DOC_MARKER.len().min(j.len())..]);
            script == ctx.actor || script.starts_with(&wrapped)
        }
        Class::Source => j[SRC_MARKER.len().min(j.len())..].starts_with(&wrapped),
        Class::Companion => {
            let mut relocated = LOC_OPEN.as_bytes().to_vec();
            relocated.extend(lit(&code::digest(j)));
            j.starts_with(LOC_OPEN.as_bytes())
                || env.programs.iter().any(|k| k.starts_with(&relocated))
        }
        Class::Launcher => j.starts_with(STUB_OPEN.as_bytes()),
        Class::Polymorphic => j.starts_with(SMN_OPEN.as_bytes()),
        Class::GenerationCounter => j.starts_with(PHI_OPEN.as_bytes()),
        Class::Multipartite => unreachable!(),
    }
}

fn selected(part: &Part, ctx: &Ctx, env: &Env, j: &Word) -> bool {
    let base = match part.class {
        Class::Document => j.starts_with(DOC_MARKER),
        Class::Source => j.starts_with(SRC_MARKER),
        Class::Launcher => *j != ctx.actor,
        _ => true,
    };
    base && match &part.filter {
        Filter::All => true,
        Filter::AllExceptInfected => !infected(part.class, ctx, env, j),
        Filter::Prefix(p) => j.starts_with(p),
    }
}

fn files(part: &Part, env: &Env) -> Vec<Word> {
    match part.target_kind() {
        TargetKind::Programs => env.programs.clone(),
        TargetKind::Data => env.data.clone(),
    }
}

pub(crate) fn condition_holds(
    cond: &InfectionCondition,
    part: Option<&Part>,
    ctx: &Ctx,
    env: &Env,
) -> bool {
    match cond {
        InfectionCondition::Always => true,
        InfectionCondition::Never => false,
        InfectionCondition::NonemptySelection => {
            let part = part.expect("selection needs a part");
            files(part, env).iter().any(|j| selected(part, ctx, env, j))
        }
        InfectionCondition::MinData(n) => env.data.len() >= *n,
        InfectionCondition::MinPrograms(n) => env.programs.len() >= *n,
        InfectionCondition::HasDataPrefix(p) => env.data.iter().any(|d| d.starts_with(p)),
    }
}

pub(crate) fn image(part: &Part, ctx: &Ctx, j: &[u8]) -> Word {
    let v = &ctx.actor;
    match part.class {
        Class::Overwriter | Class::Duplicator => v.clone(),
        Class::EctoSymbiote => code::ecto_wrap(part.concat, v, j),
        Class::Document => {
            let (script, body) = unpair(&j[DOC_MARKER.len().min(j.len())..]);
            let script = if script.is_empty() {
                v.clone()
            } else {
                code::ecto_wrap(part.concat, v, &script)
            };
            code::document(&script, &body)
        }
        Class::Source => code::source_file(&code::ecto_wrap(
            part.concat,
            v,
            &j[SRC_MARKER.len().min(j.len())..],
        )),
        Class::Companion => code::companion_form(v, j),
        Class::Launcher => code::launcher_stub(v, j),
        Class::Polymorphic | Class::GenerationCounter => ctx.img.clone().unwrap_or_default(),
        Class::Multipartite => unreachable!(),
    }
}

pub(crate) fn apply_part(part: &Part, ctx: &Ctx, env: &Env) -> Env {
    if !condition_holds(&part.condition, Some(part), ctx, env) {
        return env.clone();
    }
    if let Some(t) = &part.t {
        if !env.programs.contains(t) {
            return env.clone();
        }
    }
    let old = files(part, env);
    let mut new = old.clone();
    for (i, j) in old.iter().enumerate() {
        if !selected(part, ctx, env, j) {
            continue;
        }
        let img = image(part, ctx, j);
        match part.class {
            Class::Duplicator => new.push(img),
            Class::Companion => {
                new[i] = img;
                new.push(j.clone());
            }
            _ => new[i] = img,
        }
    }
    if part.class == Class::Launcher && new != old && !new.contains(&ctx.actor) {
        new.push(ctx.actor.clone());
    }
    let mut out = env.clone();
    match part.target_kind() {
        TargetKind::Programs => out.programs = new,
        TargetKind::Data => out.data = new,
    }
    out
}

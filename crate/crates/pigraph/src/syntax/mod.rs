//! Concrete grammar, abstract syntax and compilation.
//!
//! A model source (`.pig` file, UTF-8) declares free names and restrictions,
//! followed by one or more iterators:
//!
//! ```text
//! free(c, d) restr(S)
//! *[ priv(a) bind(x)
//!    c!<a>.d?(x).[a=x].tau.0
//! ]
//! ```
//!
//! Prefixes are `tau`, output `ch!<datum>`, input `ch?(binder)`, match
//! `[a=b]`, `sum{ P + P }` and `par{ P || P }`, separated by `.` and
//! terminated by an explicit `0`. `#` starts a comment running to the end
//! of the line. Identifiers match `[A-Za-z_][A-Za-z0-9_]*`; `free`, `restr`,
//! `priv`, `bind`, `tau`, `sum` and `par` are reserved.
//!
//! Names carry no sigils in sources: the kind of a reference is resolved
//! from the declaring list. Sigil-decorated references (`$a`, `^A`, `?x`)
//! are tolerated as long as the sigil agrees with the declaration.

mod graph;
mod lexer;
mod parser;
mod render;

use std::fmt;

use thiserror::Error;

pub use graph::{
    compile, BoxId, Configuration, IterInfo, PlaceId, PlaceInfo, PlaceType, ProcNode, RenderNode,
    StaticGraph, ZeroRole,
};
pub use render::render;

use crate::names::NameKind;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Optional kind decoration on a source name reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sigil {
    /// `$a`
    Private,
    /// `^A`
    Restriction,
    /// `?x`
    Binder,
}

impl Sigil {
    fn kind(self) -> NameKind {
        match self {
            Sigil::Private => NameKind::Private,
            Sigil::Restriction => NameKind::Restriction,
            Sigil::Binder => NameKind::Binder,
        }
    }
}

/// A name occurrence in a process body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameRef {
    pub ident: String,
    pub sigil: Option<Sigil>,
    pub span: Span,
}

/// A declared name in a `free`/`restr`/`priv`/`bind` list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub ident: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixKind {
    Silent,
    Output { chan: NameRef, datum: NameRef },
    Input { chan: NameRef, binder: NameRef },
    Match { left: NameRef, right: NameRef },
    Sum(Vec<ProcessAst>),
    Par(Vec<ProcessAst>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prefix {
    pub kind: PrefixKind,
    pub span: Span,
}

/// A process: a (possibly empty) prefix sequence closed by the explicit
/// terminator `0`. The terminator itself is implicit in this
/// representation; an empty prefix list is a bare `0` body, accepted as a
/// conservative extension of the syntax.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProcessAst {
    pub prefixes: Vec<Prefix>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IteratorAst {
    pub privates: Vec<Decl>,
    pub binders: Vec<Decl>,
    pub body: ProcessAst,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAst {
    pub free_names: Vec<Decl>,
    pub restrictions: Vec<Decl>,
    pub iterators: Vec<IteratorAst>,
}

/// Errors from parsing or well-formedness checking.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{span}: invalid character `{ch}`")]
    Lex { span: Span, ch: char },
    #[error("{span}: expected {expected}, found {found}")]
    Parse {
        span: Span,
        expected: String,
        found: String,
    },
    #[error("{span}: {construct} requires at least two branches")]
    TooFewBranches { span: Span, construct: &'static str },
    #[error("{span}: duplicate declaration of `{name}`")]
    Duplicate { span: Span, name: String },
    #[error("{span}: undeclared name `{name}`")]
    Undeclared { span: Span, name: String },
    #[error("{span}: name `{name}` is declared by another iterator and not visible here")]
    NotVisible { span: Span, name: String },
    #[error("{span}: `{name}` is declared as a {declared} name but written as {written}")]
    SigilMismatch {
        span: Span,
        name: String,
        declared: NameKind,
        written: NameKind,
    },
    #[error("{span}: input binder `{name}` is not declared in this iterator's bind list")]
    NotABinder { span: Span, name: String },
    #[error("{span}: a match prefix cannot directly precede the terminator 0")]
    MatchBeforeZero { span: Span },
    #[error("{span}: a model must declare at least one iterator")]
    NoIterators { span: Span },
}

/// Parses and validates a model source.
pub fn parse(source: &str) -> Result<GraphAst, SyntaxError> {
    let ast = parser::parse_source(source)?;
    check_well_formed(&ast)?;
    Ok(ast)
}

/// What a source identifier resolves to while checking bodies.
#[derive(Clone, Copy, PartialEq, Eq)]
struct Binding {
    kind: NameKind,
    /// Index of the declaring iterator for privates and binders.
    iterator: Option<usize>,
}

fn check_well_formed(ast: &GraphAst) -> Result<(), SyntaxError> {
    if ast.iterators.is_empty() {
        return Err(SyntaxError::NoIterators {
            span: Span::default(),
        });
    }

    // All static names are pairwise distinct across the whole graph.
    let mut bindings: std::collections::HashMap<String, Binding> = std::collections::HashMap::new();
    let mut declare = |decl: &Decl, kind: NameKind, iterator: Option<usize>| {
        if bindings
            .insert(decl.ident.clone(), Binding { kind, iterator })
            .is_some()
        {
            Err(SyntaxError::Duplicate {
                span: decl.span,
                name: decl.ident.clone(),
            })
        } else {
            Ok(())
        }
    };
    for d in &ast.free_names {
        declare(d, NameKind::Free, None)?;
    }
    for d in &ast.restrictions {
        declare(d, NameKind::Restriction, None)?;
    }
    for (i, it) in ast.iterators.iter().enumerate() {
        for d in &it.privates {
            declare(d, NameKind::Private, Some(i))?;
        }
        for d in &it.binders {
            declare(d, NameKind::Binder, Some(i))?;
        }
    }

    for (i, it) in ast.iterators.iter().enumerate() {
        check_process(&it.body, i, &bindings)?;
    }
    Ok(())
}

fn check_process(
    proc: &ProcessAst,
    iterator: usize,
    bindings: &std::collections::HashMap<String, Binding>,
) -> Result<(), SyntaxError> {
    if let Some(last) = proc.prefixes.last() {
        if matches!(last.kind, PrefixKind::Match { .. }) {
            return Err(SyntaxError::MatchBeforeZero { span: last.span });
        }
    }
    for prefix in &proc.prefixes {
        match &prefix.kind {
            PrefixKind::Silent => {}
            PrefixKind::Output { chan, datum } => {
                check_ref(chan, iterator, bindings)?;
                check_ref(datum, iterator, bindings)?;
            }
            PrefixKind::Input { chan, binder } => {
                check_ref(chan, iterator, bindings)?;
                let b = check_ref(binder, iterator, bindings)?;
                if b.kind != NameKind::Binder {
                    return Err(SyntaxError::NotABinder {
                        span: binder.span,
                        name: binder.ident.clone(),
                    });
                }
            }
            PrefixKind::Match { left, right } => {
                check_ref(left, iterator, bindings)?;
                check_ref(right, iterator, bindings)?;
            }
            PrefixKind::Sum(branches) | PrefixKind::Par(branches) => {
                debug_assert!(branches.len() >= 2);
                for branch in branches {
                    check_process(branch, iterator, bindings)?;
                }
            }
        }
    }
    Ok(())
}

fn check_ref(
    r: &NameRef,
    iterator: usize,
    bindings: &std::collections::HashMap<String, Binding>,
) -> Result<Binding, SyntaxError> {
    let binding = bindings
        .get(r.ident.as_str())
        .ok_or(SyntaxError::Undeclared {
            span: r.span,
            name: r.ident.clone(),
        })?;
    if let Some(owner) = binding.iterator {
        if owner != iterator {
            return Err(SyntaxError::NotVisible {
                span: r.span,
                name: r.ident.clone(),
            });
        }
    }
    if let Some(sigil) = r.sigil {
        if sigil.kind() != binding.kind {
            return Err(SyntaxError::SigilMismatch {
                span: r.span,
                name: r.ident.clone(),
                declared: binding.kind,
                written: sigil.kind(),
            });
        }
    }
    Ok(*binding)
}

/// Prints an AST back in the concrete grammar. Re-parsing the result yields
/// a structurally identical AST (up to source positions).
pub fn to_source(ast: &GraphAst) -> String {
    let mut out = String::new();
    out.push_str("free(");
    push_decls(&mut out, &ast.free_names);
    out.push_str(") restr(");
    push_decls(&mut out, &ast.restrictions);
    out.push_str(")\n");
    for it in &ast.iterators {
        out.push_str("*[ priv(");
        push_decls(&mut out, &it.privates);
        out.push_str(") bind(");
        push_decls(&mut out, &it.binders);
        out.push_str(") ");
        push_process(&mut out, &it.body);
        out.push_str(" ]\n");
    }
    out
}

fn push_decls(out: &mut String, decls: &[Decl]) {
    for (i, d) in decls.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&d.ident);
    }
}

fn push_ref(out: &mut String, r: &NameRef) {
    match r.sigil {
        Some(Sigil::Private) => out.push('$'),
        Some(Sigil::Restriction) => out.push('^'),
        Some(Sigil::Binder) => out.push('?'),
        None => {}
    }
    out.push_str(&r.ident);
}

fn push_process(out: &mut String, proc: &ProcessAst) {
    for prefix in &proc.prefixes {
        match &prefix.kind {
            PrefixKind::Silent => out.push_str("tau"),
            PrefixKind::Output { chan, datum } => {
                push_ref(out, chan);
                out.push_str("!<");
                push_ref(out, datum);
                out.push('>');
            }
            PrefixKind::Input { chan, binder } => {
                push_ref(out, chan);
                out.push_str("?(");
                push_ref(out, binder);
                out.push(')');
            }
            PrefixKind::Match { left, right } => {
                out.push('[');
                push_ref(out, left);
                out.push('=');
                push_ref(out, right);
                out.push(']');
            }
            PrefixKind::Sum(branches) => {
                out.push_str("sum{ ");
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    push_process(out, b);
                }
                out.push_str(" }");
            }
            PrefixKind::Par(branches) => {
                out.push_str("par{ ");
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" || ");
                    }
                    push_process(out, b);
                }
                out.push_str(" }");
            }
        }
        out.push('.');
    }
    out.push('0');
}

impl GraphAst {
    /// Copy with all source positions zeroed, for structural comparison.
    pub fn normalized(&self) -> GraphAst {
        fn norm_decl(d: &Decl) -> Decl {
            Decl {
                ident: d.ident.clone(),
                span: Span::default(),
            }
        }
        fn norm_ref(r: &NameRef) -> NameRef {
            NameRef {
                ident: r.ident.clone(),
                sigil: r.sigil,
                span: Span::default(),
            }
        }
        fn norm_proc(p: &ProcessAst) -> ProcessAst {
            ProcessAst {
                prefixes: p
                    .prefixes
                    .iter()
                    .map(|prefix| Prefix {
                        span: Span::default(),
                        kind: match &prefix.kind {
                            PrefixKind::Silent => PrefixKind::Silent,
                            PrefixKind::Output { chan, datum } => PrefixKind::Output {
                                chan: norm_ref(chan),
                                datum: norm_ref(datum),
                            },
                            PrefixKind::Input { chan, binder } => PrefixKind::Input {
                                chan: norm_ref(chan),
                                binder: norm_ref(binder),
                            },
                            PrefixKind::Match { left, right } => PrefixKind::Match {
                                left: norm_ref(left),
                                right: norm_ref(right),
                            },
                            PrefixKind::Sum(bs) => {
                                PrefixKind::Sum(bs.iter().map(norm_proc).collect())
                            }
                            PrefixKind::Par(bs) => {
                                PrefixKind::Par(bs.iter().map(norm_proc).collect())
                            }
                        },
                    })
                    .collect(),
            }
        }
        GraphAst {
            free_names: self.free_names.iter().map(norm_decl).collect(),
            restrictions: self.restrictions.iter().map(norm_decl).collect(),
            iterators: self
                .iterators
                .iter()
                .map(|it| IteratorAst {
                    privates: it.privates.iter().map(norm_decl).collect(),
                    binders: it.binders.iter().map(norm_decl).collect(),
                    body: norm_proc(&it.body),
                    span: Span::default(),
                })
                .collect(),
        }
    }
}

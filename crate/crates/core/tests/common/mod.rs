#![allow(dead_code)]

pub mod gen;
pub mod interp;
pub mod logic;

use preguss::frontend::{parse_named, resolve, IntWidth, TypedProgram};

pub fn typed(source: &str, w: IntWidth) -> TypedProgram {
    resolve(parse_named("<test>", source).expect("parses"), w).expect("resolves")
}

/// Every argument vector over `[min, max]^arity`.
pub fn all_inputs(arity: usize, w: IntWidth) -> Vec<Vec<i128>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|v| {
                (w.min()..=w.max()).map(move |x| {
                    let mut v = v.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

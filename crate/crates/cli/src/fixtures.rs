//! Worked examples, embedded as published.

use std::collections::BTreeSet;

use cmdual_core::cmdual::{brute_s0_s1, derive_params, gen_sets};
use cmdual_core::TernaryIndex;
use serde::Serialize;

#[derive(Debug, Clone, Default)]
pub struct Expected {
    pub d: Option<u64>,
    pub w: Option<u32>,
    pub parity: Option<u32>,
    pub u: Option<&'static [&'static str]>,
    pub v: Option<&'static [&'static str]>,
    pub s0_len: Option<usize>,
    pub s1_len: Option<usize>,
    pub terms: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: &'static str,
    pub n: u32,
    pub k: u32,
    pub expected: Expected,
}

const EX1_U0: &[&str] = &[
    "00000010", "00002010", "00020010", "00200010", "00202010", "02000010", "02002010", "02020010",
    "20000010", "20002010", "20020010", "20200010", "20202010",
];

const EX2_U1: &[&str] = &[
    "010101001",
    "010121001",
    "012101001",
    "210101001",
    "210121001",
];

const EX3_V0: &[&str] = &[
    "00000012", "00002012", "00020012", "00200012", "00202012", "02000012", "02002012", "02020012",
];

const EX4_V1: &[&str] = &["010101201", "012101201", "210101201"];

const N9_K5_U1: &[&str] = &[
    "000100001",
    "000100201",
    "000102001",
    "000102201",
    "002100001",
    "002102001",
    "020100001",
    "022100001",
    "200100001",
    "200100201",
    "202100001",
    "220100001",
    "222100001",
];

const N9_K5_V1: &[&str] = &[
    "000120001",
    "000120201",
    "000122001",
    "000122201",
    "002120001",
    "002122001",
    "020120001",
    "022120001",
];

const N11_K5_U0: &[&str] = &[
    "00001000010",
    "00001000210",
    "00001002010",
    "00001002210",
    "00001020010",
    "00001020210",
    "00001022010",
    "00001022210",
    "00001200010",
    "00001200210",
    "00001202010",
    "00001202210",
    "00001220010",
    "00001220210",
    "00001222010",
    "00001222210",
    "00201000010",
    "00201020010",
    "00201200010",
    "00201220010",
    "02001000010",
    "02001000210",
    "02001200010",
    "02001200210",
    "02201000010",
    "02201200010",
    "20001000010",
    "20001000210",
    "20001002010",
    "20001002210",
    "20201000010",
    "22001000010",
    "22001000210",
    "22201000010",
];

const N11_K5_V0: &[&str] = &[
    "00001000012",
    "00001000212",
    "00001002012",
    "00001002212",
    "00001020012",
    "00001020212",
    "00001022012",
    "00001022212",
    "00201000012",
    "00201020012",
    "02001000012",
    "02001000212",
    "02201000012",
    "20001000012",
    "20001000212",
    "20001002012",
    "20001002212",
    "20201000012",
    "22001000012",
    "22001000212",
    "22201000012",
];

pub fn all() -> Vec<Fixture> {
    vec![
        Fixture {
            id: "example1",
            n: 8,
            k: 7,
            expected: Expected {
                w: Some(7),
                parity: Some(6),
                u: Some(EX1_U0),
                s0_len: Some(104),
                ..Default::default()
            },
        },
        Fixture {
            id: "example2",
            n: 9,
            k: 7,
            expected: Expected {
                w: Some(4),
                parity: Some(3),
                u: Some(EX2_U1),
                s0_len: Some(45),
                ..Default::default()
            },
        },
        Fixture {
            id: "example3",
            n: 8,
            k: 7,
            expected: Expected {
                w: Some(7),
                parity: Some(6),
                v: Some(EX3_V0),
                s1_len: Some(64),
                ..Default::default()
            },
        },
        Fixture {
            id: "example4",
            n: 9,
            k: 7,
            expected: Expected {
                w: Some(4),
                parity: Some(3),
                v: Some(EX4_V1),
                s1_len: Some(27),
                ..Default::default()
            },
        },
        Fixture {
            id: "example5",
            n: 8,
            k: 7,
            expected: Expected {
                d: Some(1094),
                w: Some(7),
                parity: Some(6),
                u: Some(EX1_U0),
                v: Some(EX3_V0),
                terms: Some(21),
                ..Default::default()
            },
        },
        Fixture {
            id: "example6",
            n: 9,
            k: 7,
            expected: Expected {
                d: Some(1094),
                w: Some(4),
                parity: Some(3),
                u: Some(EX2_U1),
                v: Some(EX4_V1),
                terms: Some(8),
                ..Default::default()
            },
        },
        Fixture {
            id: "k-divides-n-plus-1",
            n: 9,
            k: 5,
            expected: Expected {
                d: Some(122),
                u: Some(N9_K5_U1),
                v: Some(N9_K5_V1),
                terms: Some(21),
                ..Default::default()
            },
        },
        Fixture {
            id: "k-divides-n-minus-1",
            n: 11,
            k: 5,
            expected: Expected {
                d: Some(122),
                u: Some(N11_K5_U0),
                v: Some(N11_K5_V0),
                terms: Some(55),
                ..Default::default()
            },
        },
    ]
}

/// One field that differs between a fixture and the recomputation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diff {
    pub field: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureResult {
    pub id: &'static str,
    pub n: u32,
    pub k: u32,
    pub diffs: Vec<Diff>,
}

impl FixtureResult {
    pub fn passed(&self) -> bool {
        self.diffs.is_empty()
    }
}

fn check<T: PartialEq + std::fmt::Debug>(
    diffs: &mut Vec<Diff>,
    field: &str,
    expected: Option<T>,
    actual: T,
) {
    if let Some(e) = expected {
        if e != actual {
            diffs.push(Diff {
                field: field.into(),
                expected: format!("{e:?}"),
                actual: format!("{actual:?}"),
            });
        }
    }
}

fn as_set(v: &[TernaryIndex]) -> BTreeSet<String> {
    v.iter().map(|j| j.to_digit_string()).collect()
}

pub fn run(fixture: &Fixture) -> FixtureResult {
    let e = &fixture.expected;
    let mut diffs = Vec::new();
    match derive_params(fixture.n, fixture.k) {
        Err(err) => diffs.push(Diff {
            field: "params".into(),
            expected: "valid".into(),
            actual: err.to_string(),
        }),
        Ok(p) => {
            check(&mut diffs, "d", e.d, p.d);
            check(&mut diffs, "w", e.w, p.w);
            check(&mut diffs, "parity", e.parity, p.parity_count);
            let sets = gen_sets(&p);
            let listed = |l: Option<&[&str]>| {
                l.map(|l| l.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>())
            };
            check(&mut diffs, "U", listed(e.u), as_set(&sets.u));
            check(&mut diffs, "V", listed(e.v), as_set(&sets.v));
            check(
                &mut diffs,
                "terms",
                e.terms,
                (sets.u.len() + sets.v.len()) as u64,
            );
            check(&mut diffs, "terms_formula", e.terms, p.term_count());
            if e.s0_len.is_some() || e.s1_len.is_some() {
                match brute_s0_s1(&p) {
                    Ok((s0, s1)) => {
                        check(&mut diffs, "|S0|", e.s0_len, s0.len());
                        check(&mut diffs, "|S1|", e.s1_len, s1.len());
                    }
                    Err(err) => diffs.push(Diff {
                        field: "S0/S1".into(),
                        expected: "computed".into(),
                        actual: err.to_string(),
                    }),
                }
            }
        }
    }
    FixtureResult {
        id: fixture.id,
        n: fixture.n,
        k: fixture.k,
        diffs,
    }
}

pub fn run_fixtures() -> Vec<FixtureResult> {
    all().iter().map(run).collect()
}

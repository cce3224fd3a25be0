//! Benchmarks for `cmdual-core`; see `benches/`.

use cmdual_core::gf3::CmFunction;
use cmdual_core::FieldCtx;

/// Table of `Tr(g x^d)` over GF(3^n), the usual benchmark input.
pub fn cm_table(n: u32, k: u32) -> (FieldCtx, Vec<u8>) {
    let ctx = FieldCtx::new(n, None).expect("field");
    let table = CmFunction::new(&ctx, ctx.generator(), k)
        .expect("parameters")
        .tabulate();
    (ctx, table)
}

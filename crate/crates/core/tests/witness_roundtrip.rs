//! Every witness the `witness` command emits at m = 4 survives a trip
//! through JSON and independent re-verification; single-bit damage to any
//! coefficient of either map is always caught.

use kimgold::cli::{verify_document, witness, FieldArgs, OracleMode};
use kimgold::equiv::Status;
use kimgold::kim::gamma_report;
use kimgold::{FieldCtx, KimCoeffs};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

fn apn_triples(ctx: &FieldCtx) -> Vec<KimCoeffs> {
    let (q, size) = (ctx.q() as u64, ctx.size() as u64);
    (0..q)
        .flat_map(|a1| (0..size).flat_map(move |a2| (0..size).map(move |a3| (a1, a2, a3))))
        .map(|(a1, a2, a3)| KimCoeffs::from_encodings(ctx, a1, a2, a3).unwrap())
        .filter(|k| gamma_report(ctx, k).unwrap().apn)
        .collect()
}

fn report_json(ctx: &FieldCtx, k: &KimCoeffs) -> Value {
    let rep = witness(ctx, k, OracleMode::Off).unwrap();
    assert_eq!(rep.status, Status::APN);
    serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap()
}

#[test]
fn every_m4_witness_reverifies() {
    let ctx = FieldCtx::new(4).unwrap();
    let triples = apn_triples(&ctx);
    assert_eq!(triples.len(), 3794);
    let failures: Vec<_> = triples
        .par_iter()
        .filter(|k| {
            let doc = report_json(&ctx, k);
            let rep = verify_document(&doc, &FieldArgs::default()).unwrap();
            !rep.valid
        })
        .collect();
    assert!(
        failures.is_empty(),
        "{} witnesses rejected, e.g. {:?}",
        failures.len(),
        failures[0]
    );
}

#[test]
fn single_bit_perturbations_are_rejected() {
    let ctx = FieldCtx::new(4).unwrap();
    let mut triples = apn_triples(&ctx);
    triples.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
    for k in triples.iter().take(40) {
        let doc = report_json(&ctx, k);
        for map in ["L1", "L2"] {
            for i in 0..ctx.n() as usize {
                for bit in 0..ctx.n() {
                    let mut bad = doc.clone();
                    let c = bad["witness"][map][i].as_u64().unwrap();
                    bad["witness"][map][i] = (c ^ (1 << bit)).into();
                    let rep = verify_document(&bad, &FieldArgs::default()).unwrap();
                    assert!(
                        !rep.valid,
                        "{k:?}: flipping bit {bit} of {map}[{i}] went unnoticed"
                    );
                }
            }
        }
        // a bit beyond the field is rejected as well, not a crash
        let mut bad = doc.clone();
        bad["witness"]["L1"][0] = (bad["witness"]["L1"][0].as_u64().unwrap() | 1 << ctx.n()).into();
        assert!(!verify_document(&bad, &FieldArgs::default()).unwrap().valid);
    }
}

#[test]
fn damaged_source_or_target_is_rejected() {
    let ctx = FieldCtx::new(4).unwrap();
    let k = KimCoeffs::from_encodings(&ctx, 0, 16, 245).unwrap();
    let doc = report_json(&ctx, &k);
    let mut bad = doc.clone();
    bad["witness"]["source"]["a3"] = 244.into();
    assert!(!verify_document(&bad, &FieldArgs::default()).unwrap().valid);
    let mut bad = doc.clone();
    let other = if doc["witness"]["target"] == "G1" {
        "G2"
    } else {
        "G1"
    };
    bad["witness"]["target"] = other.into();
    assert!(!verify_document(&bad, &FieldArgs::default()).unwrap().valid);
    let mut short = doc.clone();
    short["witness"]["L2"].as_array_mut().unwrap().pop();
    assert!(
        !verify_document(&short, &FieldArgs::default())
            .unwrap()
            .valid
    );
}

#[test]
fn field_context_falls_back_to_flags() {
    let ctx = FieldCtx::new(4).unwrap();
    let k = KimCoeffs::from_encodings(&ctx, 0, 0, 7).unwrap();
    let mut bare = report_json(&ctx, &k)["witness"].clone();
    bare.as_object_mut().unwrap().remove("field_ctx");
    assert!(verify_document(&bare, &FieldArgs::default()).is_err());
    let flags = FieldArgs {
        m: Some(4),
        ..FieldArgs::default()
    };
    assert!(verify_document(&bare, &flags).unwrap().valid);
}

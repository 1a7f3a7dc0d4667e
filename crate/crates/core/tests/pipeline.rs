//! Cross-module properties: instances, embedding, global and local codes.

use std::sync::OnceLock;

use hdx_core::complex::{build_complex, load_instance, save_instance, ComplexInstance, DEFAULT_GROUP_BUDGET};
use hdx_core::embedding::{rm_restrict, MultiPoly};
use hdx_core::global_code::{
    assemble_code, corrupt, digits_to_word, local_specs, multiply, translate, vertex_chart, vertex_tester,
    word_to_digits, GlobalCode,
};
use hdx_core::local_decoder::{agreement_decode, DecodeStatus, LineEnsemble, LocalCodeCache, SkewEnsemble};
use proptest::prelude::*;

fn q3() -> &'static ComplexInstance {
    static X: OnceLock<ComplexInstance> = OnceLock::new();
    X.get_or_init(|| build_complex(3, 1, None, DEFAULT_GROUP_BUDGET).unwrap())
}

fn code(d: [u32; 3]) -> &'static GlobalCode<'static> {
    static CODES: OnceLock<[GlobalCode<'static>; 2]> = OnceLock::new();
    let codes = CODES.get_or_init(|| {
        [
            assemble_code(q3(), [1, 1, 1]).unwrap(),
            assemble_code(q3(), [2, 2, 2]).unwrap(),
        ]
    });
    &codes[d[0] as usize - 1]
}

fn affine_word(c0: u32, coeffs: &[u32]) -> Vec<u32> {
    let vars: Vec<usize> = (0..9).collect();
    rm_restrict(&MultiPoly::affine(9, c0, &vars, coeffs), q3()).unwrap()
}

fn cache() -> &'static LocalCodeCache {
    LocalCodeCache::global()
}

#[test]
fn saved_instance_reloads_identically() {
    let dir = std::env::temp_dir().join(format!("hdx-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("q3.json");
    let header = save_instance(q3(), &path).unwrap();
    let y = load_instance(&path).unwrap();
    std::fs::remove_dir_all(&dir).ok();
    let x = q3();
    assert_eq!(header.group_order, 5616);
    assert_eq!(x.elements(), y.elements());
    assert!((0..x.num_vertices()).all(|v| x.vertex_star(v) == y.vertex_star(v)));
    assert!((0..x.num_edges()).all(|e| x.edge_star(e) == y.edge_star(e)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn affine_words_are_codewords_everywhere(c0 in 0u32..3, coeffs in prop::collection::vec(0u32..3, 9)) {
        let w = affine_word(c0, &coeffs);
        let c = code([1, 1, 1]);
        prop_assert!(c.membership(&w).unwrap().member);
        prop_assert!(c.line_membership(&w).unwrap().member);
        // every vertex view lies in its local code
        let specs = local_specs(c, cache()).unwrap();
        for v in (0..q3().num_vertices()).step_by(37) {
            let chart = vertex_chart(v, c);
            prop_assert!(specs[chart.ty - 1].contains(&chart.pullback(&w)));
        }
        prop_assert!(vertex_tester(&w, c, cache()).unwrap().rejecting.is_empty());
    }

    #[test]
    fn products_and_translates(
        a in prop::collection::vec(0u32..3, 10),
        b in prop::collection::vec(0u32..3, 10),
        g in 0usize..5616,
    ) {
        let wa = affine_word(a[0], &a[1..]);
        let wb = affine_word(b[0], &b[1..]);
        let prod = multiply(&wa, &wb, 3).unwrap();
        prop_assert!(code([2, 2, 2]).membership(&prod).unwrap().member);
        let t = translate(&wa, q3().element(g), q3()).unwrap();
        prop_assert!(code([1, 1, 1]).membership(&t).unwrap().member);
    }

    #[test]
    fn one_corruption_is_seen_by_three_vertices(seed in any::<u64>()) {
        let c = code([1, 1, 1]);
        let w = affine_word(1, &[0, 1, 0, 0, 2, 0, 0, 0, 1]);
        let bad = corrupt(&w, 1, seed, 3).unwrap();
        prop_assert!(!c.membership(&bad).unwrap().member);
        prop_assert_eq!(vertex_tester(&bad, c, cache()).unwrap().rejecting.len(), 3);
    }

    #[test]
    fn digit_strings_round_trip(w in prop::collection::vec(0u32..5, 0..200)) {
        let s = word_to_digits(&w, 5).unwrap();
        prop_assert_eq!(digits_to_word(&s, 5).unwrap(), w);
    }

    #[test]
    fn decoder_repairs_one_bad_row(
        coords in prop::collection::vec(0u32..13, 8),
        b in 0u32..13,
        c in 0u32..13,
        shift in 1u32..13,
    ) {
        let (p, dx, dy) = (13, 1, 1);
        let spec = cache().get(p, dx, dy).unwrap();
        let word = spec.encode(&coords).unwrap();
        let mut x = LineEnsemble::from_word(&word, p, dx).unwrap();
        let y = SkewEnsemble::from_word(&word, p, dy).unwrap();
        let mut row = x.row(b, c).to_vec();
        row[0] = (row[0] + shift) % p;
        x.set_row(b, c, row).unwrap();
        let r = agreement_decode(&x, &y, cache()).unwrap();
        prop_assert_eq!(r.disagreement_points, p as usize);
        prop_assert!(matches!(r.status, DecodeStatus::WithinBound | DecodeStatus::Exact));
        prop_assert_eq!(r.q.unwrap().eval, word);
    }
}

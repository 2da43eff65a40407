use idla_core::balls::ball_volume;
use idla_core::group::{breadth_first_layers, GeneratorId};
use idla_core::{GroupElement, GroupModel};
use proptest::prelude::*;

fn models() -> Vec<GroupModel> {
    vec![
        GroupModel::tree(3).unwrap(),
        GroupModel::tree(4).unwrap(),
        GroupModel::tree(5).unwrap(),
        GroupModel::involution_product(4).unwrap(),
        GroupModel::free_group(3).unwrap(),
        GroupModel::lamplighter(),
    ]
}

fn element(model: &GroupModel, raw: &[u8]) -> GroupElement {
    let d = model.degree() as u8;
    let letters: Vec<GeneratorId> = raw.iter().map(|&l| l % d).collect();
    model.reduce(&letters).unwrap()
}

fn raw_word() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(any::<u8>(), 0..24)
}

proptest! {
    #[test]
    fn multiplication_is_associative(m in 0usize..6, x in raw_word(), y in raw_word(), z in raw_word()) {
        let model = &models()[m];
        let (x, y, z) = (element(model, &x), element(model, &y), element(model, &z));
        let left = model.multiply(&model.multiply(&x, &y).unwrap(), &z).unwrap();
        let right = model.multiply(&x, &model.multiply(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn reduce_is_idempotent_and_shortening(m in 0usize..5, raw in raw_word()) {
        let model = &models()[m];
        let d = model.degree() as u8;
        let letters: Vec<GeneratorId> = raw.iter().map(|&l| l % d).collect();
        let once = model.reduce(&letters).unwrap();
        let word = once.as_word().unwrap();
        prop_assert!(word.len() <= letters.len());
        prop_assert_eq!(model.reduce(word.letters()).unwrap(), once.clone());
        for pair in word.letters().windows(2) {
            prop_assert_ne!(pair[1], model.inverse_of(pair[0]));
        }
    }

    #[test]
    fn inverse_cancels(m in 0usize..6, x in raw_word()) {
        let model = &models()[m];
        let x = element(model, &x);
        let inv = model.inverse(&x);
        prop_assert_eq!(model.multiply(&x, &inv).unwrap(), model.identity());
        prop_assert_eq!(model.multiply(&inv, &x).unwrap(), model.identity());
        prop_assert_eq!(model.word_length(&inv), model.word_length(&x));
    }

    #[test]
    fn word_length_is_subadditive(m in 0usize..6, x in raw_word(), y in raw_word()) {
        let model = &models()[m];
        let (x, y) = (element(model, &x), element(model, &y));
        let xy = model.multiply(&x, &y).unwrap();
        prop_assert!(model.word_length(&xy) <= model.word_length(&x) + model.word_length(&y));
    }

    #[test]
    fn format_and_parse_round_trip(m in 0usize..6, x in raw_word()) {
        let model = &models()[m];
        let x = element(model, &x);
        prop_assert_eq!(model.parse(&model.format(&x)).unwrap(), x);
    }

    #[test]
    fn neighbours_are_distinct_and_adjacent(m in 0usize..6, x in raw_word()) {
        let model = &models()[m];
        let x = element(model, &x);
        let nbrs = model.neighbors(&x);
        prop_assert_eq!(nbrs.len(), model.degree());
        let mut unique = nbrs.clone();
        unique.sort_by_key(|y| model.format(y));
        unique.dedup();
        prop_assert_eq!(unique.len(), nbrs.len());
        for y in &nbrs {
            prop_assert_eq!(model.word_distance(&x, y).unwrap(), 1);
        }
    }
}

#[test]
fn breadth_first_search_matches_ball_volume() {
    for (q, depth) in [(3u8, 9usize), (4, 7), (5, 6), (6, 5)] {
        let model = GroupModel::tree(q).unwrap();
        let layers = breadth_first_layers(&model, depth);
        let mut total = 0u128;
        for (n, layer) in layers.iter().enumerate() {
            total += layer.len() as u128;
            assert_eq!(total, ball_volume(n as u64, q as u32).unwrap(), "q={q}, n={n}");
        }
    }
}

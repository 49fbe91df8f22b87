use super::*;
use crate::signal::{synthesize, SampleWindow};

fn recipe(id: RecipeId, instances: usize) -> DatasetRecipe {
    DatasetRecipe { noise_instances: instances, set_size: 400, ..DatasetRecipe::new(id, 150, 50, 17) }
}

#[test]
fn grid_cardinalities() {
    assert_eq!(generate(&recipe(RecipeId::GridL2, 1)).unwrap().len(), 375);
    assert_eq!(generate(&recipe(RecipeId::GridL4, 1)).unwrap().len(), 625);
    assert_eq!(generate(&recipe(RecipeId::Set3, 1)).unwrap().len(), 5625);
    assert_eq!(recipe(RecipeId::GridL2, 50).signal_count(), 375);
    let other_seed = DatasetRecipe { seed: 999, ..recipe(RecipeId::GridL2, 1) };
    assert_eq!(generate(&other_seed).unwrap().len(), 375);
}

#[test]
fn noise_replication() {
    let ds = generate(&recipe(RecipeId::GridL2, 3)).unwrap();
    assert_eq!(ds.len(), 1125);
    let group = &ds.examples[3..6];
    assert!(group.iter().all(|e| e.truth == group[0].truth));
    assert_ne!(group[0].meta.noise_seed, group[1].meta.noise_seed);
    assert_ne!(group[0].x_a, group[1].x_a);
    let clean = synthesize(&group[0].truth, 150).unwrap();
    for e in group {
        // Same clean signal underneath: residuals are pure noise of the same scale.
        let resid: f64 = e.x_a.iter().chain(&e.x_m).zip(clean.samples()).map(|(a, b)| (a - b).powi(2)).sum();
        let sigma2 = clean.energy() / (150.0 * 10f64.powf(1.5));
        assert!((resid / 150.0 / sigma2 - 1.0).abs() < 0.5);
    }
}

#[test]
fn frequency_constraints() {
    let df = 1.0 / 150.0;
    for id in RecipeId::ALL {
        let ds = generate(&recipe(id, 1)).unwrap();
        for e in &ds.examples {
            let f = e.truth.frequencies();
            assert_eq!(f.len(), id.components());
            assert!(f.iter().all(|f| *f > 0.0 && *f <= 0.5), "{id}: {f:?}");
            assert!(e.truth.amplitudes().iter().all(|a| *a == 1.0));
            match id {
                RecipeId::Set1 => assert!((f[1] - f[0] - 0.5 * df).abs() < 1e-12),
                RecipeId::Set2 => assert!((f[1] - f[0]).abs() >= df),
                RecipeId::Set4 => {
                    let k = (f[1] - f[0]) / df;
                    assert!((k - k.round()).abs() < 1e-6, "{k}");
                }
                _ => {}
            }
        }
    }
}

#[test]
fn grid_overlaps_are_kept() {
    let ds = generate(&recipe(RecipeId::GridL2, 1)).unwrap();
    let coincident = ds
        .examples
        .iter()
        .filter(|e| (e.truth.frequencies()[0] - e.truth.frequencies()[1]).abs() < 1e-12)
        .count();
    assert_eq!(coincident, 5);
}

#[test]
fn set6_is_centred() {
    let ds = generate(&DatasetRecipe { set_size: 4000, ..recipe(RecipeId::Set6, 1) }).unwrap();
    let mean = ds.examples.iter().map(|e| e.truth.frequencies()[0]).sum::<f64>() / ds.len() as f64;
    assert!((mean - 0.25).abs() < 0.01, "{mean}");
}

#[test]
fn generation_is_seeded() {
    let r = recipe(RecipeId::Set5, 2);
    assert_eq!(generate(&r).unwrap(), generate(&r).unwrap());
    let other = DatasetRecipe { seed: 18, ..r };
    assert_ne!(generate(&other).unwrap().examples[0], generate(&recipe(RecipeId::Set5, 2)).unwrap().examples[0]);
}

#[test]
fn recipe_validation() {
    let base = recipe(RecipeId::Set1, 1);
    for bad in [
        DatasetRecipe { m: 150, ..base.clone() },
        DatasetRecipe { m: 0, ..base.clone() },
        DatasetRecipe { snr_db: f64::NAN, ..base.clone() },
        DatasetRecipe { noise_instances: 0, ..base.clone() },
        DatasetRecipe { set_size: 0, ..base.clone() },
    ] {
        assert!(generate(&bad).is_err());
    }
    assert_eq!("grid-l2".parse::<RecipeId>().unwrap(), RecipeId::GridL2);
    assert_eq!("Set-3".parse::<RecipeId>().unwrap(), RecipeId::Set3);
    assert!("set7".parse::<RecipeId>().is_err());
}

fn tiny(count: usize, id: RecipeId) -> Dataset {
    let r = DatasetRecipe::new(id, 3, 1, 0);
    let examples = (0..count)
        .map(|i| Example {
            x_a: vec![i as f64],
            x_m: vec![0.0, 1.0],
            truth: SinusoidSpec::unit(vec![0.1, 0.2]).unwrap(),
            meta: ExampleMeta { recipe_id: id, noise_seed: i as u64 },
        })
        .collect();
    Dataset::new(vec![r], examples, 3, 1).unwrap()
}

#[test]
fn split_sizes() {
    let (train, test) = train_test_split(&tiny(37_875, RecipeId::Set1), 0.8, 1).unwrap();
    assert_eq!((train.len(), test.len()), (30_300, 7_575));
    let (train, test) = train_test_split(&tiny(2, RecipeId::Set1), 0.5, 1).unwrap();
    assert_eq!((train.len(), test.len()), (1, 1));
    assert!(train_test_split(&tiny(2, RecipeId::Set1), 0.1, 1).is_err());
    assert!(train_test_split(&tiny(2, RecipeId::Set1), 1.0, 1).is_err());
}

#[test]
fn split_is_a_deterministic_stratified_partition() {
    let ds = tiny(100, RecipeId::Set1).merge(tiny(50, RecipeId::Set5)).unwrap();
    let (a1, b1) = train_test_split(&ds, 0.8, 4).unwrap();
    let (a2, b2) = train_test_split(&ds, 0.8, 4).unwrap();
    assert_eq!((&a1, &b1), (&a2, &b2));
    assert_eq!(a1.counts()[&RecipeId::Set1], 80);
    assert_eq!(a1.counts()[&RecipeId::Set5], 40);
    let mut all: Vec<(RecipeId, u64)> = a1
        .examples
        .iter()
        .chain(&b1.examples)
        .map(|e| (e.meta.recipe_id, e.meta.noise_seed))
        .collect();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 150);
    let (a3, _) = train_test_split(&ds, 0.8, 5).unwrap();
    assert_ne!(a1, a3);
}

#[test]
fn file_roundtrip_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.fpds");
    let ds = generate(&recipe(RecipeId::Set1, 2))
        .unwrap()
        .merge(generate(&recipe(RecipeId::Set4, 1)).unwrap())
        .unwrap();
    write_dataset(&ds, &path).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back, ds);
    assert_eq!(back.examples[0].meta.recipe_id, RecipeId::Set1);
    assert_eq!(back.examples.last().unwrap().meta.recipe_id, RecipeId::Set4);

    let manifest: Manifest =
        serde_json::from_str(&std::fs::read_to_string(Manifest::path_for(&path)).unwrap()).unwrap();
    assert_eq!(manifest.examples, 1200);
    assert_eq!(manifest.counts[0].signals, 400);
    assert_eq!(manifest.counts[1].examples, 400);
}

#[test]
fn corrupt_files() {
    let bytes = io::encode(&tiny(4, RecipeId::Set2));
    assert!(io::decode(&bytes).is_ok());
    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    assert!(matches!(io::decode(&bad_magic), Err(Error::Format(_))));
    let mut bad_header = bytes.clone();
    bad_header[13] = b'!';
    assert!(matches!(io::decode(&bad_header), Err(Error::Format(_))));
    assert!(matches!(io::decode(&bytes[..bytes.len() - 3]), Err(Error::Format(_))));
    let mut version = bytes.clone();
    version[4] = 2;
    assert!(matches!(io::decode(&version), Err(Error::Format(_))));
}

#[test]
fn pairs_view() {
    let ds = tiny(3, RecipeId::Set3);
    let pairs = ds.pairs();
    assert_eq!(pairs.len(), 3);
    assert_eq!(pairs[2].0, &[2.0]);
    let _ = SampleWindow::observed(pairs[0].1.to_vec()).unwrap();
}

use udemd::io::{distances, embedding, graph, signals};
use udemd::Error;
use udemd_core::generators::{gen_sphere_dataset, SphereConfig};
use udemd_core::metric::pairwise_l1;
use udemd_core::{udemd_embed, DiffusionOperator, Subsample, UdemdConfig, WalkOptions, WeightSign};

fn sphere_embedding(cfg: UdemdConfig) -> udemd_core::MultiscaleEmbedding {
    let data = gen_sphere_dataset(&SphereConfig { noise_spike: true, ..SphereConfig::new(12, 5) }).unwrap();
    let op = DiffusionOperator::build(&data.graph, WalkOptions::default()).unwrap();
    udemd_embed(&op, &data.signals, &cfg).unwrap()
}

#[test]
fn embedding_files_round_trip_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        UdemdConfig::default(),
        UdemdConfig { weight_sign: WeightSign::FineHeavy, alpha: 0.25, ..UdemdConfig::with_scale(2) },
        UdemdConfig { subsample: Subsample::Uniform { rate: 0.3, seed: 11 }, ..UdemdConfig::with_scale(3) },
    ];
    for (i, cfg) in configs.into_iter().enumerate() {
        let e = sphere_embedding(cfg);
        for ext in ["bin", "txt"] {
            let path = dir.path().join(format!("e{i}.{ext}"));
            embedding::save_embedding(&e, &path).unwrap();
            let back = embedding::load_embedding(&path).unwrap();
            assert_eq!(back, e);
            let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(back.data()), bits(e.data()));
        }
    }
}

#[test]
fn embedding_corruption_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.bin");
    embedding::save_embedding(&sphere_embedding(UdemdConfig::default()), &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();

    let mut wrong_version = bytes.clone();
    wrong_version[8] = 99;
    std::fs::write(&path, &wrong_version).unwrap();
    assert!(matches!(embedding::load_embedding(&path), Err(Error::VersionMismatch(_))));

    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(matches!(embedding::load_embedding(&path), Err(Error::ChecksumFailure(_))));

    let text_path = dir.path().join("e.txt");
    embedding::save_embedding(&sphere_embedding(UdemdConfig::default()), &text_path).unwrap();
    let text = std::fs::read_to_string(&text_path).unwrap();
    let cut: String = text.lines().take(text.lines().count() - 3).map(|l| format!("{l}\n")).collect();
    std::fs::write(&text_path, cut).unwrap();
    assert!(matches!(embedding::load_embedding(&text_path), Err(Error::ChecksumFailure(_))));
}

#[test]
fn signals_and_graph_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_sphere_dataset(&SphereConfig::new(8, 1)).unwrap();
    let g = dir.path().join("g.edges");
    graph::save_edge_list(&data.graph, &g).unwrap();
    let (back, _) = graph::load_edge_list(&g).unwrap();
    assert_eq!(back.fingerprint(), data.graph.fingerprint());

    let n = data.graph.node_count();
    for name in ["s.csv", "s.bin"] {
        let path = dir.path().join(name);
        signals::save_signals(&data.signals, &path).unwrap();
        let s = signals::load_signals(&path, Some(n)).unwrap();
        assert_eq!(s.column_major(), data.signals.column_major());
    }
    assert!(matches!(
        signals::load_signals(&dir.path().join("s.csv"), Some(n + 1)),
        Err(Error::RowCountMismatch { .. })
    ));
}

#[test]
fn distance_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let e = sphere_embedding(UdemdConfig::default());
    let dm = pairwise_l1(e.data(), e.signals(), e.dim()).unwrap();
    let path = dir.path().join("d.csv");
    distances::save_distances(&dm, &path).unwrap();
    let back = distances::load_distances(&path).unwrap();
    assert_eq!(back.values(), dm.values());
    let header = std::fs::read_to_string(&path).unwrap().lines().next().unwrap().to_string();
    assert!(header.starts_with(",s0,s1,"));
}

use irradiance_core::ingest::Dataset;
use irradiance_core::model::ModelFile;
use irradiance_core::pipeline::{fit_model, synthetic_dataset, FitConfig, Stage};
use irradiance_core::sim::Simulator;
use irradiance_core::smoothing::TmaConfig;

fn synthetic_year(model: &ModelFile, seed: u64) -> Dataset {
    let sim = Simulator::new(model).unwrap();
    let days: Vec<u32> = (0..365).collect();
    Dataset { days: synthetic_dataset(&sim, &days, 10, seed).unwrap(), rejected: vec![], gaps: vec![] }
}

#[test]
fn fit_recovers_generator_mean_trends() {
    let generator = ModelFile::reference().with_concentrated_maps(0.02).unwrap();
    let data = synthetic_year(&generator, 5);
    let cfg = FitConfig { tma: TmaConfig::new(5, 0).unwrap(), ..FitConfig::default() };
    let out = fit_model(&data, &cfg).unwrap();
    assert!(out.skipped.is_empty());
    assert_eq!(out.params.len(), 365);
    let (g, f) = (&generator.trends, &out.model.trends);
    for (gp, fp) in [(g.a, f.a), (g.b, f.b), (g.c, f.c)] {
        let gm = gp.trend.y0 + gp.residual.expected();
        let fm = fp.trend.y0 + fp.residual.expected();
        assert!((gm - fm).abs() <= 0.02 * gm.abs(), "{gm} vs {fm}");
        assert!((gp.trend.y1 - fp.trend.y1).abs() <= 0.02 * gm.abs());
        assert!((gp.trend.y2 - fp.trend.y2).abs() <= 0.02 * gm.abs());
    }
    assert_eq!(out.model.grid().j, generator.grid().j);
}

#[test]
fn fitted_model_survives_disk_round_trip() {
    let data = synthetic_year(&ModelFile::reference(), 6);
    let model = fit_model(&data, &FitConfig::default()).unwrap().model;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.write(std::fs::File::create(&path).unwrap()).unwrap();
    let back = ModelFile::from_reader(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, model);
}

#[test]
fn empty_dataset_fails_at_ingest() {
    let empty = Dataset { days: vec![], rejected: vec![], gaps: vec![] };
    assert_eq!(fit_model(&empty, &FitConfig::default()).unwrap_err().stage, Stage::Ingest);
}

#[test]
fn too_few_days_fail_at_trends() {
    let mut data = synthetic_year(&ModelFile::reference(), 7);
    data.days.truncate(5);
    let err = fit_model(&data, &FitConfig::default()).unwrap_err();
    assert!(matches!(err.stage, Stage::Trends | Stage::Fit), "{err}");
}

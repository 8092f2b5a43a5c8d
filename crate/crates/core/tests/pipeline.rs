use gract::dataio::{gen_synthetic, read_pings, regularize, write_pings, SynthConfig};
use gract::{BuildConfig, Mode, OracleStore, Rect, TrajectoryIndex};

#[test]
fn csv_regularize_build_reload() {
    let cfg = SynthConfig {
        num_objects: 25,
        num_instants: 300,
        width: 256,
        height: 256,
        seed: 5,
        ..SynthConfig::default()
    };
    let data = gen_synthetic(&cfg);
    let mut csv = Vec::new();
    write_pings(&mut csv, &data.to_pings()).unwrap();
    let pings = read_pings(csv.as_slice()).unwrap();
    let (back, report) = regularize(&pings, &data.grid).unwrap();
    assert_eq!(report.out_of_grid, 0);
    assert_eq!(report.superseded, 0);
    assert_eq!(back.num_instants, data.num_instants);

    let oracle = OracleStore::new(back.clone());
    let dir = std::env::temp_dir().join(format!("gract-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for mode in [Mode::Scdc, Mode::Gract] {
        let idx = TrajectoryIndex::build(&back, &BuildConfig::new(32, mode)).unwrap();
        let path = dir.join(format!("{mode}.idx"));
        idx.save(&path).unwrap();
        let idx = TrajectoryIndex::load(&path).unwrap();
        assert_eq!(idx.mode(), mode);
        for o in 0..back.num_objects() as u32 {
            assert_eq!(
                idx.trajectory(o, 0, 299).unwrap(),
                oracle.trajectory(o, 0, 299).unwrap()
            );
        }
        let rect = Rect::new(40, 40, 120, 90);
        for t in (0..300).step_by(13) {
            assert_eq!(idx.time_slice(&rect, t).unwrap(), oracle.time_slice(&rect, t).unwrap());
        }
        assert_eq!(
            idx.time_interval(&rect, 17, 250).unwrap(),
            oracle.time_interval(&rect, 17, 250).unwrap()
        );
        let stats = idx.stats();
        assert!(stats.total < stats.plain);
    }
    std::fs::remove_dir_all(&dir).ok();
}

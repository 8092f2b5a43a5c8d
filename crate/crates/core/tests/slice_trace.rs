use gract::index::{Outcome, Prune};
use gract::{BuildConfig, Cell, GridConfig, Mode, OracleStore, QueryOptions, Rect, RegularDataset, TrajectoryIndex};

fn walk(cells: &[(u32, u32)]) -> Vec<Option<Cell>> {
    cells.iter().map(|&(x, y)| Some(Cell::new(x, y))).collect()
}

// nine objects, unit speed, query window (8,8)-(10,10) at instant 2
fn fleet() -> RegularDataset {
    let tracks = vec![
        walk(&[(0, 0), (0, 0), (0, 0)]),
        walk(&[(7, 7), (8, 8), (9, 9)]),
        walk(&[(19, 19), (18, 19), (17, 19)]),
        walk(&[(0, 19), (1, 19), (1, 18)]),
        walk(&[(12, 9), (13, 9), (13, 9)]),
        walk(&[(9, 9), (9, 9), (9, 9)]),
        walk(&[(19, 0), (19, 1), (19, 2)]),
        walk(&[(3, 3), (4, 4), (5, 5)]),
        walk(&[(6, 12), (7, 11), (7, 11)]),
    ];
    RegularDataset {
        grid: GridConfig {
            width: 20,
            height: 20,
            ..GridConfig::default()
        },
        num_instants: 3,
        ids: (0..9).map(|o| format!("v{o}")).collect(),
        tracks,
    }
}

#[test]
fn candidates_and_early_discard() {
    let data = fleet();
    let rect = Rect::new(8, 8, 10, 10);
    for mode in [Mode::Scdc, Mode::Gract] {
        let idx = TrajectoryIndex::build(&data, &BuildConfig::new(16, mode)).unwrap();
        assert_eq!(idx.v_max(), 1);
        let trace = idx.explain_time_slice(&rect, 2, &QueryOptions::default()).unwrap();
        assert_eq!(trace.anchor, 0);
        assert!(!trace.backward);
        let ids: Vec<u32> = trace.candidates.iter().map(|c| c.object).collect();
        assert_eq!(ids, vec![1, 4, 5, 8], "{mode}");
        let outcome = |o: u32| trace.candidates.iter().find(|c| c.object == o).unwrap().outcome;
        assert_eq!(outcome(1), Outcome::Inside(Cell::new(9, 9)));
        assert_eq!(outcome(5), Outcome::Inside(Cell::new(9, 9)));
        assert_eq!(outcome(8), Outcome::Outside(Cell::new(7, 11)));
        if mode == Mode::Scdc {
            assert_eq!(
                outcome(4),
                Outcome::Pruned {
                    instant: 1,
                    by: Prune::Reach
                }
            );
        } else {
            assert!(matches!(outcome(4), Outcome::Pruned { .. } | Outcome::Outside(_)));
        }
        let (hits, stats) = idx.time_slice_with(&rect, 2, &QueryOptions::default()).unwrap();
        assert_eq!(hits, vec![(1, Cell::new(9, 9)), (5, Cell::new(9, 9))]);
        assert_eq!(stats.candidates, 4);
        let oracle = OracleStore::new(data.clone());
        assert_eq!(hits, oracle.time_slice(&rect, 2).unwrap());
    }
}

#[test]
fn unpruned_trace_keeps_every_candidate() {
    let data = fleet();
    let idx = TrajectoryIndex::build(&data, &BuildConfig::new(16, Mode::Scdc)).unwrap();
    let rect = Rect::new(8, 8, 10, 10);
    let trace = idx.explain_time_slice(&rect, 2, &QueryOptions::unpruned()).unwrap();
    assert!(trace
        .candidates
        .iter()
        .all(|c| !matches!(c.outcome, Outcome::Pruned { .. })));
    assert_eq!(trace.candidates[1].outcome, Outcome::Outside(Cell::new(13, 9)));
}

use proptest::prelude::*;

use super::*;
use crate::planner::dijkstra4;
use crate::semmap::{new_map, EXPLORED, OBSTACLE};

fn wall(map: &mut SemanticMap, c: Cell) {
    map.mark_cell(EXPLORED, c);
    map.mark_cell(OBSTACLE, c);
}

fn explored_block(m: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> SemanticMap {
    let mut map = new_map(6, m).unwrap();
    for y in y0..y1 {
        for x in x0..x1 {
            map.mark_cell(EXPLORED, Cell::new(x, y));
        }
    }
    map
}

#[test]
fn unexplored_map_has_no_frontier() {
    let map = new_map(6, 21).unwrap();
    assert!(frontier_cells(&map).is_empty());
    assert_eq!(
        frontier_goal(&map, map.center(), 2),
        Err(ExploreError::NoFrontier)
    );
}

#[test]
fn explored_block_border_is_frontier() {
    let map = explored_block(21, 9, 9, 12, 12);
    let f = frontier_cells(&map);
    assert_eq!(f.len(), 8);
    assert!(!f.contains(&Cell::new(10, 10)));
}

#[test]
fn nearer_frontier_wins() {
    // Explored corridor row 30 from x=10 to x=60, walls above and below, unexplored ends.
    let mut map = new_map(6, 81).unwrap();
    for x in 10..=60 {
        for y in 27..=33 {
            map.mark_cell(EXPLORED, Cell::new(x, y));
        }
        wall(&mut map, Cell::new(x, 26));
        wall(&mut map, Cell::new(x, 34));
    }
    for y in 27..=33 {
        wall(&mut map, Cell::new(10, y));
    }
    // Agent 10 cells (0.5 m) from the open east end at x=60, 40 cells from the walled west end.
    let agent = Cell::new(50, 30);
    assert_eq!(frontier_goal(&map, agent, 0), Ok(Cell::new(60, 30)));
}

#[test]
fn single_frontier_cell() {
    let mut map = new_map(6, 21).unwrap();
    for c in map.explored().bounds().cells().collect::<Vec<_>>() {
        map.mark_cell(EXPLORED, c);
    }
    // Re-open one cell: only its neighbors can be frontier, so block three of them.
    let mut map2 = new_map(6, 21).unwrap();
    for c in Rect::new(0, 0, 21, 21).cells() {
        if c != Cell::new(15, 15) {
            map2.mark_cell(EXPLORED, c);
        }
    }
    for c in [Cell::new(14, 15), Cell::new(15, 14), Cell::new(15, 16)] {
        map2.mark_cell(OBSTACLE, c);
    }
    assert!(frontier_cells(&map).is_empty());
    assert_eq!(frontier_cells(&map2), vec![Cell::new(16, 15)]);
    assert_eq!(
        frontier_goal(&map2, Cell::new(5, 5), 0),
        Ok(Cell::new(16, 15))
    );
}

#[test]
fn prior_prefers_goal_adjacent_frontier() {
    // Agent in the middle of an explored strip; a toilet is mapped near the far west
    // frontier, the east frontier is closer.
    let mut map = new_map(6, 121).unwrap();
    for x in 20..=100 {
        for y in 55..=65 {
            map.mark_cell(EXPLORED, Cell::new(x, y));
        }
        wall(&mut map, Cell::new(x, 54));
        wall(&mut map, Cell::new(x, 66));
    }
    map.mark_cell(
        crate::semmap::CATEGORY_BASE + Category::Toilet.index(),
        Cell::new(22, 60),
    );
    let agent = Cell::new(70, 60);
    let mut a = [[0.0; Category::COUNT]; Category::COUNT];
    a[Category::Bed.index()][Category::Toilet.index()] = 10.0;
    let priors = CategoryPriors::new(a, 2.0, 0.05).unwrap();
    let goal = prior_goal(&map, agent, Category::Bed, &priors, 0).unwrap();
    assert!(goal.x < 30, "{goal}");
    let near = frontier_goal(&map, agent, 0).unwrap();
    assert_eq!(near.x, 100, "{near}");
}

#[test]
fn exploit_returns_every_goal_cell() {
    let mut map = explored_block(41, 10, 10, 30, 30);
    let ch = crate::semmap::CATEGORY_BASE + Category::Bed.index();
    map.mark_cell(ch, Cell::new(12, 14));
    map.mark_cell(ch, Cell::new(20, 11));
    let mut policy = FrontierPolicy { dilation: 0 };
    let (cells, mode) =
        goal_or_explore(&map, Cell::new(20, 20), Category::Bed, &mut policy).unwrap();
    assert_eq!(mode, Mode::Exploit);
    assert_eq!(cells, vec![Cell::new(20, 11), Cell::new(12, 14)]);
    let (cells, mode) =
        goal_or_explore(&map, Cell::new(20, 20), Category::Tv, &mut policy).unwrap();
    assert_eq!(mode, Mode::Explore);
    assert_eq!(cells.len(), 1);
}

#[test]
fn priors_load_from_toml() {
    let p: CategoryPriors =
        toml::from_str("lambda = 1.5\nbeta = 0.1\n[affinity.bed]\ntv = 0.7\nbed = 1.0\n").unwrap();
    assert_eq!(p.affinity(Category::Bed, Category::Tv), 0.7);
    assert_eq!(p.affinity(Category::Bed, Category::Chair), 0.0);
    assert_eq!(p.lambda, 1.5);
    let bad: Result<CategoryPriors, _> = toml::from_str("[affinity.bed]\nlamp = 1.0\n");
    assert!(bad.is_err());
    let back: CategoryPriors = toml::from_str(&toml::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
}

#[test]
fn default_priors_are_identity_dominant() {
    let p = CategoryPriors::default();
    for g in Category::ALL {
        for c in Category::ALL {
            assert!(p.affinity(g, c) <= p.affinity(g, g));
        }
    }
    assert!((p.affinity(Category::Couch, Category::Tv) - 0.5).abs() < 1e-12);
    assert_eq!(p.affinity(Category::Bed, Category::Toilet), 0.0);
}

/// Random map: explored blob with speckled obstacles; agent on an explored free cell.
fn random_map(seed: u64) -> (SemanticMap, Cell) {
    use rand::{Rng, SeedableRng};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = new_map(6, 51).unwrap();
    let (x0, y0) = (rng.random_range(2..15), rng.random_range(2..15));
    let (x1, y1) = (rng.random_range(30..49), rng.random_range(30..49));
    for y in y0..y1 {
        for x in x0..x1 {
            if rng.random::<f64>() < 0.97 {
                map.mark_cell(EXPLORED, Cell::new(x, y));
            }
        }
    }
    for _ in 0..rng.random_range(0..60) {
        let c = Cell::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        map.mark_cell(OBSTACLE, c);
    }
    for _ in 0..rng.random_range(0..6) {
        let c = Cell::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        let cat = Category::ALL[rng.random_range(0..Category::COUNT)];
        map.mark_cell(crate::semmap::CATEGORY_BASE + cat.index(), c);
    }
    let agent = loop {
        let c = Cell::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if map.explored()[c] && !map.obstacles()[c] {
            break c;
        }
    };
    (map, agent)
}

fn brute_frontier(map: &SemanticMap) -> Vec<Cell> {
    let e = map.explored();
    let o = map.obstacles();
    e.iter_cells()
        .filter(|(c, &v)| {
            v && !o[*c]
                && [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)]
                    .iter()
                    .any(|&(dx, dy)| {
                        e.cell_at(c.x as i64 + dx, c.y as i64 + dy)
                            .is_some_and(|n| !e[n])
                    })
        })
        .map(|(c, _)| c)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frontier_matches_definition(seed in any::<u64>()) {
        let (map, _) = random_map(seed);
        prop_assert_eq!(frontier_cells(&map), brute_frontier(&map));
    }

    #[test]
    fn frontier_goal_is_nearest_by_oracle(seed in any::<u64>()) {
        let (map, agent) = random_map(seed);
        let Ok(goal) = frontier_goal(&map, agent, 1) else { return Ok(()); };
        let frontier = frontier_cells(&map);
        prop_assert!(frontier.contains(&goal));
        // Same planning mask: the pick minimizes the full field, which is bounded
        // above by 4-connected Dijkstra.
        let window = map_window(&map, &[agent], 1);
        let mask = agent_mask(&map, agent, window, 1);
        let full = crate::planner::distance_field(&mask, &[to_local(window, agent)], map.cell_size()).unwrap();
        let d4 = dijkstra4(&mask, &[to_local(window, agent)], map.cell_size());
        let chosen = full.value(to_local(window, goal));
        let best = frontier
            .iter()
            .map(|&f| full.value(to_local(window, f)))
            .fold(f64::INFINITY, f64::min);
        let best4 = frontier
            .iter()
            .map(|&f| d4.at(to_local(window, f)))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(chosen <= best + 1e-9, "{chosen} vs {best}");
        prop_assert!(chosen <= best4 + 1e-9, "{chosen} vs {best4}");
    }

    #[test]
    fn zero_priors_reduce_to_frontier(seed in any::<u64>()) {
        let (map, agent) = random_map(seed);
        let a = frontier_goal(&map, agent, 1);
        let b = prior_goal(&map, agent, Category::Bed, &CategoryPriors::zero(0.05), 1);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn prior_argmax_is_scale_invariant(seed in any::<u64>(), k in 0.1f64..20.0) {
        let (map, agent) = random_map(seed);
        let p = CategoryPriors::default();
        let g = Category::ALL[(seed % 6) as usize];
        prop_assert_eq!(prior_goal(&map, agent, g, &p, 1), prior_goal(&map, agent, g, &p.scaled(k), 1));
    }
}

use chrono::{Days, NaiveDate};
use tmes_core::extremal::TimeSeriesPair;
use tmes_core::models::frechet_sample;
use tmes_core::rng::{open_unit, substream};
use tmes_core::rolling::{align, estimate_window, ingest_csv, rolling_tmes, AlignPolicy, RollingConfig};
use tmes_core::{stats, TmesError};

fn independent_pair(n: usize, seed: u64) -> TimeSeriesPair {
    let mut rng = substream(seed, &[]);
    let x = (0..n).map(|_| stats::norm_inv(open_unit(&mut rng))).collect();
    let y = (0..n).map(|_| frechet_sample(4.0, &mut rng)).collect();
    TimeSeriesPair::new(x, y).unwrap()
}

fn small_config() -> RollingConfig {
    RollingConfig { window: 60, lags: vec![0, 1, 3], m_n: 10, b: 50, seed: 5, ..Default::default() }
}

#[test]
fn one_result_per_window_end() {
    let ts = independent_pair(150, 1);
    let cfg = small_config();
    let out = rolling_tmes(&ts, None, &cfg).unwrap();
    assert_eq!(out.len(), 150 - 60 + 1);
    assert_eq!(out[0].end, 60);
    assert_eq!(out.last().unwrap().end, 150);
    for r in &out {
        assert!(r.delta0.iter().all(|v| v.is_finite()));
        assert!(r.bands.iter().all(|(lo, hi)| lo <= hi));
    }
}

#[test]
fn windows_equal_standalone_estimates() {
    let ts = independent_pair(150, 2);
    let cfg = small_config();
    let out = rolling_tmes(&ts, None, &cfg).unwrap();
    let mut rng = substream(3, &[]);
    for _ in 0..10 {
        let end = 60 + (open_unit(&mut rng) * 90.0) as usize;
        let sub = ts.slice(end - 60, end).unwrap();
        let alone = estimate_window(&sub, end, &cfg).unwrap();
        assert_eq!(alone, out[end - 60]);
    }
}

#[test]
fn reproducible_across_runs_and_thread_counts() {
    let ts = independent_pair(120, 4);
    let cfg = small_config();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| rolling_tmes(&ts, None, &cfg).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(1));
    assert_eq!(a, run(4));
}

#[test]
fn constant_y_window_centres_on_minus_mean() {
    let x: Vec<f64> = (0..80).map(|i| i as f64 / 10.0).collect();
    let ts = TimeSeriesPair::new(x, vec![1.0; 80]).unwrap();
    let cfg = small_config();
    let out = rolling_tmes(&ts, None, &cfg).unwrap();
    let first_mean = stats::mean(&ts.x()[..60]);
    for (v, (lo, hi)) in out[0].delta0.iter().zip(&out[0].bands) {
        assert!((v + first_mean).abs() < 1e-12);
        assert!((lo + first_mean).abs() < 1e-12 && (hi + first_mean).abs() < 1e-12);
    }
}

#[test]
fn window_validation() {
    let ts = independent_pair(100, 5);
    let too_wide = RollingConfig { window: 101, ..small_config() };
    assert!(matches!(rolling_tmes(&ts, None, &too_wide), Err(TmesError::InvalidWindow(_))));
    let too_narrow = RollingConfig { window: 4, lags: vec![3], m_n: 2, ..small_config() };
    assert!(matches!(rolling_tmes(&ts, None, &too_narrow), Err(TmesError::InvalidWindow(_))));
}

#[test]
fn dates_label_window_ends() {
    let ts = independent_pair(70, 6);
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    let dates: Vec<NaiveDate> = (0..70).map(|i| start + Days::new(i)).collect();
    let out = rolling_tmes(&ts, Some(&dates), &small_config()).unwrap();
    assert_eq!(out[0].end_date, Some(dates[59]));
    assert_eq!(out[10].end_date, Some(dates[69]));
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn ingest_sorts_and_rejects_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "a.csv", "date,value\n2020-01-02,1.5\n2020-01-01,2.0\n");
    let s = ingest_csv(&p, "date", "value").unwrap();
    assert_eq!(s.values, vec![2.0, 1.5]);
    assert!(s.dates[0] < s.dates[1]);

    let p = write(&dir, "b.csv", "date,value\n2020-01-01,1\n2020-01-01,2\n");
    assert!(matches!(ingest_csv(&p, "date", "value"), Err(TmesError::DuplicateDate { .. })));

    let p = write(&dir, "c.csv", "date,value\n2020-01-01,1\n2020-13-01,2\n");
    assert!(matches!(ingest_csv(&p, "date", "value"), Err(TmesError::Parse { line: 3, .. })));
    assert!(matches!(ingest_csv(&p, "day", "value"), Err(TmesError::MissingColumn { .. })));
}

#[test]
fn long_daily_file_keeps_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let start = NaiveDate::from_ymd_opt(1985, 1, 1).unwrap();
    let mut body = String::from("# daily fixture\ndate,value\n");
    for i in 0..9786u64 {
        body.push_str(&format!("{},{}\n", start + Days::new(i), (i as f64 * 0.37).sin()));
    }
    let p = write(&dir, "long.csv", &body);
    let s = ingest_csv(&p, "date", "value").unwrap();
    assert_eq!(s.len(), 9786);
}

#[test]
fn alignment_policies() {
    let dir = tempfile::tempdir().unwrap();
    let a = ingest_csv(
        &write(&dir, "a.csv", "date,v\n2020-01-01,1\n2020-01-02,2\n2020-01-03,3\n"),
        "date",
        "v",
    )
    .unwrap();
    let b = ingest_csv(&write(&dir, "b.csv", "date,v\n2020-01-01,10\n2020-01-03,30\n"), "date", "v").unwrap();
    let c = ingest_csv(&write(&dir, "c.csv", "date,v\n2021-01-01,1\n2021-01-02,2\n"), "date", "v").unwrap();

    let same = align(&a, &a, AlignPolicy::ErrorOnGap).unwrap();
    assert_eq!(same.pair.len(), 3);
    let joined = align(&a, &b, AlignPolicy::Intersect).unwrap();
    assert_eq!(joined.pair.x(), &[1.0, 3.0]);
    assert_eq!(joined.pair.y(), &[10.0, 30.0]);
    assert!(matches!(align(&a, &b, AlignPolicy::ErrorOnGap), Err(TmesError::CalendarGap(_))));
    assert!(matches!(align(&a, &c, AlignPolicy::Intersect), Err(TmesError::EmptyIntersection)));
}

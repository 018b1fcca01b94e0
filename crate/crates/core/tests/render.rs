use synlab::config::RunConfig;
use synlab::experiment::{Experiment, StdpWindowResult};
use synlab::fitting::{fit_linear, Side};
use synlab::render::render_svg;

fn window(figure_mode: bool) -> StdpWindowResult {
    let mut config = RunConfig::default();
    config.protocol.dt_min = -2.0;
    config.protocol.dt_max = 2.0;
    config.protocol.dt_step = 1.0;
    config.protocol.epochs = 300;
    config.protocol.figure_mode = figure_mode;
    Experiment::from_config(&config).unwrap().run().unwrap()
}

#[test]
fn empty_window_has_axes_only() {
    let empty = StdpWindowResult {
        devices: 16,
        epochs: 0,
        seed: 0,
        figure_mode: false,
        points: Vec::new(),
        wall_time_s: 0.0,
    };
    let svg = render_svg(&empty, &[]);
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("class=\"axes\""));
    assert!(!svg.contains("class=\"marker\""));
    assert!(!svg.contains("<polyline"));
}

#[test]
fn one_marker_per_occupied_level() {
    let w = window(false);
    let occupied: usize = w
        .points
        .iter()
        .map(|p| p.histogram.iter().filter(|&&c| c > 0).count())
        .sum();
    let svg = render_svg(&w, &[]);
    assert_eq!(svg.matches("class=\"marker\"").count(), occupied);
}

#[test]
fn figure_mode_caps_markers_per_point() {
    let w = window(true);
    let svg = render_svg(&w, &[]);
    let markers = svg.matches("class=\"marker\"").count();
    assert!(markers > w.points.len());
    assert!(markers <= 150 * w.points.len());
}

#[test]
fn fits_are_overlaid() {
    let w = window(false);
    let set = fit_linear(&[(1.0, 10.0), (2.0, 8.0), (3.0, 6.0)], Side::Set).unwrap();
    let reset = fit_linear(&[(1.0, 10.0), (2.0, 8.0), (3.0, 6.0)], Side::Reset).unwrap();
    let svg = render_svg(&w, &[&set, &reset]);
    assert_eq!(svg.matches("class=\"fit linear\"").count(), 2);
    assert!(!svg.contains("fit exponential"));
}

use std::fmt::Write;

use popshm::History;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

/// Rounds up to 1, 2 or 5 times a power of ten.
fn nice_ceiling(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return 1.0;
    }
    let p = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * p)
        .find(|&v| v >= x * (1.0 - 1e-12))
        .unwrap_or(10.0 * p)
}

/// Learning curves of train, validation and test NMSE against epoch, with
/// the best validation epoch marked.
pub fn history_svg(history: &History) -> String {
    let epochs = &history.epochs;
    let x_max = epochs.iter().map(|r| r.epoch).max().unwrap_or(1).max(1) as f64;
    let x_min = epochs.iter().map(|r| r.epoch).min().unwrap_or(0) as f64;
    let x_span = (x_max - x_min).max(1.0);
    let y_raw = epochs
        .iter()
        .flat_map(|r| [r.train_nmse, r.val_nmse, r.test_nmse])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let y_max = nice_ceiling(y_raw);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |e: f64| LEFT + (e - x_min) / x_span * pw;
    let py = |v: f64| TOP + ph - (v.clamp(0.0, y_max) / y_max) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for k in 0..=5 {
        let v = y_max * k as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let ticks = 5.min(x_span as usize).max(1);
    for k in 0..=ticks {
        let e = (x_min + x_span * k as f64 / ticks as f64).round();
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{e}</text>"#,
            px(e),
            TOP + ph + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">epoch</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">NMSE (%)</text>"#,
        TOP + ph / 2.0
    );

    type Pick = fn(&popshm::training::EpochRecord) -> f64;
    let series: [(&str, &str, Pick); 3] = [
        ("train", "#1f77b4", |r| r.train_nmse),
        ("validation", "#ff7f0e", |r| r.val_nmse),
        ("test", "#2ca02c", |r| r.test_nmse),
    ];
    for (k, (name, colour, pick)) in series.iter().enumerate() {
        let points: Vec<String> = epochs
            .iter()
            .filter(|r| pick(r).is_finite())
            .map(|r| format!("{:.2},{:.2}", px(r.epoch as f64), py(pick(r))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{name}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0
        );
    }
    if let Some(best) = history.best() {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="none" stroke="#ff7f0e" stroke-width="2"><title>best validation NMSE {:.3} at epoch {}</title></circle>"##,
            px(best.epoch as f64),
            py(best.val_nmse),
            best.val_nmse,
            best.epoch
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use popshm::training::EpochRecord;

    #[test]
    fn ceilings() {
        assert_eq!(nice_ceiling(0.0), 1.0);
        assert_eq!(nice_ceiling(1.0), 1.0);
        assert_eq!(nice_ceiling(17.0), 20.0);
        assert_eq!(nice_ceiling(101.0), 200.0);
        assert_eq!(nice_ceiling(3.0), 5.0);
    }

    #[test]
    fn three_curves() {
        let history = History {
            epochs: (1..=4)
                .map(|e| EpochRecord {
                    epoch: e,
                    train_nmse: 100.0 / e as f64,
                    val_nmse: 110.0 / e as f64,
                    test_nmse: 120.0 / e as f64,
                    seconds: e as f64,
                })
                .collect(),
        };
        let svg = history_svg(&history);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("epoch 4"));
    }
}

use serde_json::{json, Value};

/// Seven significant digits, fixed notation where it stays readable.
pub fn fmt7(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let e = v.abs().log10().floor() as i32;
    if (-4..7).contains(&e) {
        format!("{:.*}", (6 - e).max(0) as usize, v)
    } else {
        format!("{v:.6e}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "info",
        }
    }
}

pub struct Row {
    pub check: String,
    pub computed: String,
    pub expected: String,
    pub status: Status,
}

#[derive(Default)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn check(&mut self, check: &str, computed: String, expected: String, ok: bool) {
        self.rows.push(Row {
            check: check.into(),
            computed,
            expected,
            status: if ok { Status::Pass } else { Status::Fail },
        });
    }

    pub fn info(&mut self, check: &str, computed: String, expected: String) {
        self.rows.push(Row {
            check: check.into(),
            computed,
            expected,
            status: Status::Info,
        });
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }

    pub fn render(&self) -> String {
        let head = ["check", "computed", "published", "status"];
        let cells: Vec<[&str; 4]> = self
            .rows
            .iter()
            .map(|r| [r.check.as_str(), r.computed.as_str(), r.expected.as_str(), r.status.label()])
            .collect();
        let mut width = head.map(str::len);
        for c in &cells {
            for i in 0..4 {
                width[i] = width[i].max(c[i].chars().count());
            }
        }
        let line = |c: [&str; 4]| {
            let mut s = String::new();
            for i in 0..4 {
                let pad = width[i] - c[i].chars().count();
                s.push_str(c[i]);
                if i < 3 {
                    s.push_str(&" ".repeat(pad + 2));
                }
            }
            s.push('\n');
            s
        };
        let mut out = line(head);
        out.push_str(&line(width.map(|w| &"------------------------------------------------------------"[..w.min(60)])));
        for c in cells {
            out.push_str(&line(c));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    json!({
                        "check": r.check,
                        "computed": r.computed,
                        "published": r.expected,
                        "status": r.status.label(),
                    })
                })
                .collect(),
        )
    }
}

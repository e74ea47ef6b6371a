// Copyright 2026 The sigscope Authors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic JSON and CSV emission. Floats are written with 17
//! significant digits so every value round-trips exactly.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sigscope_core::{
    dynamics::TracePoint,
    estimator::{DevelopmentRow, SignatureRow},
    sl2::DevelopmentPoint,
};

/// `d.dddddddddddddddde±x`, 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Pretty JSON with fixed-precision floats and a trailing newline.
/// Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv writes UTF-8")
}

pub fn signature_csv(rows: &[SignatureRow]) -> String {
    table(
        &["n", "normalized_hs", "normalized_rank_one", "max_abs_coefficient"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                format_float(r.normalized_hs),
                format_float(r.normalized_rank_one),
                format_float(r.max_abs_coefficient),
            ]
        }),
    )
}

pub fn estimate_csv(rows: &[DevelopmentRow]) -> String {
    table(
        &["lambda", "log_norm_over_lambda", "integral", "integral_consistent"],
        rows.iter().map(|r| {
            vec![
                format_float(r.lambda),
                format_float(r.log_norm_over_lambda),
                format_float(r.integral),
                r.integral_consistent.to_string(),
            ]
        }),
    )
}

pub fn development_csv(rows: &[DevelopmentPoint]) -> String {
    table(
        &["lambda", "log_norm", "log_norm_over_lambda"],
        rows.iter().map(|r| {
            vec![
                format_float(r.lambda),
                format_float(r.log_norm),
                format_float(r.log_norm_over_lambda),
            ]
        }),
    )
}

pub fn trace_csv(rows: &[TracePoint]) -> String {
    table(
        &["t", "alpha", "two_phi", "psi", "cumulative_I"],
        rows.iter().map(|r| {
            vec![
                format_float(r.t),
                format_float(r.alpha),
                format_float(r.two_phi),
                format_float(r.psi),
                format_float(r.cumulative_integral),
            ]
        }),
    )
}

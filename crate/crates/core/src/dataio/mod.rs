//! File formats shared by every module: pinned-dialect CSV tables,
//! FRED-layout series and deterministic SVG charts.

pub mod series;
pub mod svg;
pub mod table;

pub use series::{
    parse_series, read_series, series_to_csv, write_series, Series, SeriesError, SeriesRead, Unit,
};
pub use svg::{render_chart, write_chart, ChartError, ChartKind, ChartSeries, ChartSpec};
pub use table::{
    read_table, table_to_csv, write_table, Cell, Column, ColumnKind, TableDocument, TableError,
};

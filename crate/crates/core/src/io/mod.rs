//! Scenario files and result writers.

mod output;
mod scenario_file;

pub use output::{
    outlets_header, write_fields, write_ledger, write_outlets, write_outputs, OutputPaths, FIELDS_FILE, LEDGER_FILE,
    OUTLETS_FILE,
};
pub use scenario_file::{
    bundled_examples, load_scenario, GeometrySection, InitialSection, KineticsSection, LayerRow, MaterialSection,
    NumericsSection, OutputSection, ReactionSection, ScenarioFile, StageRow, EXAMPLE1, EXAMPLE2,
};

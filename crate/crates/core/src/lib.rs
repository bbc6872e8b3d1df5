pub mod bench;
pub mod builder;
pub mod checks;
pub mod dxf;
pub mod geometry;
pub mod graph;
pub mod pipeline;
pub mod planner;
pub mod report;
pub mod topology;

//! Component models of one loading train: tanks, pump, transfer lines and valves.

pub mod pipe;
pub mod pump;
pub mod tank;
pub mod valve;

pub use pipe::{friction_factor, pipe_cell_derivatives, pipe_pressure_drop, PipeDerivatives, PipeLine};
pub use pump::{pump_dp, pump_efficiency, pump_outlet, PumpError, PumpModel, PumpOutlet};
pub use tank::{
    boil_off_rate, overall_u_for_bor, sphere_area, tank_derivatives, tank_flash, tank_flash_from,
    tank_heat_ingress, FlashError, Stream, TankFlows, TankGeometry, TankIntensive, TankState,
};
pub use valve::{valve_flow, valve_outlet, Characteristic, ValveModel};

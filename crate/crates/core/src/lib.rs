//! Rule-aware behavior planning for lane-merge traffic.
//!
//! Traffic rules written as finite-trace temporal formulas are compiled to
//! automata whose states travel with the search state of a Monte Carlo Tree
//! Search planner. Rewards are vectors ordered by priority and compared with
//! a thresholded lexicographic order.
//!
//! * [`ltlf`]: formulas, automata and runtime monitors.
//! * [`world`]: merge corridor, kinematics, labels and collision checks.
//! * [`behavior`]: IDM/MOBIL for other agents and the ego action set.
//! * [`planner`]: combined state, reward layouts and the search itself.
//! * [`bench`]: scenarios, closed-loop episodes and benchmark reports.

pub mod behavior;
pub mod bench;
pub mod ltlf;
pub mod planner;
pub mod world;

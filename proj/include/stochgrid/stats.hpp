#pragma once

namespace stochgrid {

// Experiment telemetry mirroring the reported table columns.
struct RunStats {
    long points_evaluated = 0;
    int max_cuts = 0;
    double master_time = 0.0;  // simulated (or measured) seconds in master solves
    double wall_clock = 0.0;   // simulated (or measured) seconds end to end
    double avg_active_workers = 0.0;
    int max_workers = 0;  // requested cap
    double parallel_efficiency = 0.0;
    bool efficiency_defined = true;  // false when no worker time was owned
    long tasks_executed = 0;
    double total_worker_cpu = 0.0;
};

}  // namespace stochgrid

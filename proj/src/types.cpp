#include "gridresv/types.hpp"

#include "gridresv/error.hpp"

namespace gridresv {

void check_task(const Task& task) {
  if (task.id.empty()) throw Error(ErrorCode::InvalidValue, "taskId: empty");
  if (task.start < 0) throw Error(ErrorCode::InvalidValue, "startTime: negative (" + task.id + ")");
  if (task.end <= task.start) {
    throw Error(ErrorCode::InvalidValue, "endTime: not after startTime (" + task.id + ")");
  }
  if (task.load <= 0 || task.load > 100) {
    throw Error(ErrorCode::InvalidValue, "load: outside (0, 100] (" + task.id + ")");
  }
}

void check_limits(const SchedulerLimits& limits) {
  if (limits.max_load <= 0 || limits.max_load > 100) {
    throw Error(ErrorCode::InvalidArgument, "maxLoad must be in (0, 100]");
  }
  if (limits.max_tasks < 1) throw Error(ErrorCode::InvalidArgument, "maxTasks must be >= 1");
}

}  // namespace gridresv

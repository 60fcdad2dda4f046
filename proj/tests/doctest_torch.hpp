#pragma once

#include <torch/torch.h>

// c10's logging header defines glog-style CHECK macros; doctest's must win.
#undef CHECK
#undef CHECK_EQ
#undef CHECK_NE
#undef CHECK_LE
#undef CHECK_LT
#undef CHECK_GE
#undef CHECK_GT

#include <doctest.h>

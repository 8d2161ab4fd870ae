#include "doctest.h"
TEST_SUITE("calibrate") {}

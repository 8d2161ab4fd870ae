#include "doctest.h"
TEST_SUITE("harness") {}

#include <doctest.h>
TEST_SUITE_BEGIN("kernel");
TEST_SUITE_END();

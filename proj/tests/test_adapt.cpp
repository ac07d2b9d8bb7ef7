#include <doctest.h>
TEST_SUITE_BEGIN("adapt");
TEST_SUITE_END();

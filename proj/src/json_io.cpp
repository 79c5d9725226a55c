namespace risktool {}

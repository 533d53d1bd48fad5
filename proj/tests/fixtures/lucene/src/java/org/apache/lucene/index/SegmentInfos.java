package org.apache.lucene.index;

import java.io.IOException;
import java.util.ArrayList;
import java.util.List;
import java.util.Map;

public final class SegmentInfos implements Cloneable, Iterable<SegmentCommitInfo> {

    private final List<SegmentCommitInfo> segments = new ArrayList<>();

    private Map<String, String> userData;

    private long generation;

    public static SegmentInfos readCommit(Directory directory, String segmentFileName) throws IOException {
        long generation = generationFromSegmentsFileName(segmentFileName);
        IndexInput input = directory.openInput(segmentFileName, IOContext.READ);
        try {
            return readCommit(directory, input, generation);
        } finally {
            input.close();
        }
    }

    public String getUserDataValue(String key) {
        String value = userData.get(key);
        return value.isEmpty() ? null : value;
    }

    public SegmentCommitInfo info(int i) {
        SegmentCommitInfo info = segments.get(i);
        if (info == null) {
            throw new IllegalStateException("no segment at " + i);
        }
        return info;
    }

    public long totalMaxDoc() {
        long count = 0;
        for (SegmentCommitInfo info : segments) {
            count += info.info.maxDoc();
        }
        return count;
    }

    @Override
    public SegmentInfos clone() {
        SegmentInfos sis = (SegmentInfos) super.clone();
        sis.userData = new java.util.HashMap<>(userData);
        sis.generation = generation;
        return sis;
    }
}
